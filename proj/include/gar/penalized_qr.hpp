#pragma once

#include <cstdint>

#include "gar/dataset.hpp"
#include "gar/qpcr.hpp"
#include "gar/qr_core.hpp"

namespace gar {

enum class PenaltyKind { l1, scad, mcp };

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::l1;
  double lambda = 0.0;
  double a = 0.0;  // unused for l1; SCAD needs a > 2, MCP a > 1
  void validate() const;
};

/// q_{lambda,a}(b): nonnegative, even, nondecreasing in |b|. SCAD and MCP
/// integrate their displayed derivatives from q(0) = 0 and saturate at
/// (a+1) lambda^2 / 2 and a lambda^2 / 2 respectively.
double penalty_value(const PenaltySpec& spec, double b);

/// q'_{lambda,a}(b) for b >= 0; all three kinds start at lambda.
double penalty_derivative(const PenaltySpec& spec, double b);

struct PqrOptions {
  QrOptions inner;
  int max_outer = 25;       // local linear approximation steps
  double outer_tol = 1e-6;  // coefficient change tolerance
};

struct PqrDiagnostics {
  std::vector<double> objective_trace;  // penalized objective per outer step
  int outer_iterations = 0;
};

/// Penalized quantile regression, intercept unpenalized. l1 solves one
/// weighted quantile LP via pseudo-observations; SCAD/MCP iterate a local
/// linear approximation initialized at the l1 solution. Coefficients
/// thresholded out by the penalty are exactly zero.
QuantileModel fit_penalized(const PanelData& panel, QuantileLevel tau,
                            const PenaltySpec& spec, const PqrOptions& opts = {},
                            PqrDiagnostics* diag = nullptr);

/// Smallest lambda that zeroes every coefficient, from the KKT bound
/// max_j |sum_t psi(y - q_tau) x_tj| / T at the intercept-only fit.
double lambda_max(const PanelData& panel, QuantileLevel tau);

struct CvGrid {
  std::vector<double> lambdas;  // strictly decreasing, positive
  std::vector<double> a_values;
  int n_folds = 5;
  bool shuffle = false;  // contiguous time blocks by default
  std::uint64_t seed = 0;
  void validate() const;
};

CvGrid default_grid(const PanelData& panel, QuantileLevel tau, PenaltyKind kind,
                    int n_lambda = 50);

/// (lambda, a) minimizing held-out mean quantile loss across folds; ties go
/// to the larger lambda. Grid points whose fit fails anywhere are skipped.
PenaltySpec cross_validate(const PanelData& panel, QuantileLevel tau,
                           PenaltyKind kind, const CvGrid& grid);

}  // namespace gar
