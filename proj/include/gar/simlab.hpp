#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "gar/types.hpp"

namespace gar {

enum class DgpSetup { fixed_sparse, time_varying_sparse, dense };

struct DgpSpec {
  DgpSetup setup = DgpSetup::fixed_sparse;
  int T = 0;
  int p = 0;
  int s = 5;  // relevant predictor count
  std::uint64_t seed = 0;
  void validate() const;
};

struct DgpDraw {
  Vector y;
  Matrix x;
  IndexSet true_support;  // {0 .. s-1}
};

/// Location-scale coefficient schedules at (1-based) time t. Fixed sparse:
/// beta = 1, alpha = -1 on the support; time-varying: beta drops to 0.5
/// after floor(T/2); dense: off-support entries equal 1/p.
void dgp_coefficients(const DgpSpec& spec, int t, Vector& alpha, Vector& beta);

/// y_t = x_t'alpha_t + (x_t'beta_t) eps_t over supplied draws; the
/// deterministic core of generate().
DgpDraw assemble(const DgpSpec& spec, const Matrix& x, const Vector& eps);

/// Half-normal predictors, standard normal noise.
DgpDraw generate(const DgpSpec& spec, std::mt19937_64& rng);

// An estimator handle returns the set of selected column indices.
using SelectorFn =
    std::function<IndexSet(const Vector& y, const Matrix& x, QuantileLevel tau)>;

struct SimulationReport {
  std::vector<double> per_relevant_frequency;  // length s
  double avg_false = 0.0;
  int n_reps = 0;
  int n_failures = 0;
  std::string method;
};

/// Monte Carlo selection study: replication r uses the engine derived from
/// (spec.seed, r), so extending n_reps never changes earlier replications.
/// Failed replications are counted and dropped from the denominators.
SimulationReport run_study(const DgpSpec& spec, const std::string& method,
                           const SelectorFn& fit, QuantileLevel tau, int n_reps);

}  // namespace gar
