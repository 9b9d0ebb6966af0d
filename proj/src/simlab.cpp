#include "gar/simlab.hpp"

#include <cmath>

#include "gar/errors.hpp"
#include "gar/parallel.hpp"
#include "gar/rng.hpp"

namespace gar {

void DgpSpec::validate() const {
  if (T < 2) throw Error(ErrorKind::usage, "DgpSpec: need T >= 2");
  if (p < 1 || s < 0 || s > p)
    throw Error(ErrorKind::usage, "DgpSpec: need 0 <= s <= p, p >= 1");
}

void dgp_coefficients(const DgpSpec& spec, int t, Vector& alpha, Vector& beta) {
  spec.validate();
  if (t < 1 || t > spec.T) throw Error(ErrorKind::usage, "t outside 1..T");
  alpha = Vector::Zero(spec.p);
  beta = Vector::Zero(spec.p);
  double beta_on = 1.0;
  if (spec.setup == DgpSetup::time_varying_sparse && t > spec.T / 2)
    beta_on = 0.5;
  for (int j = 0; j < spec.s; ++j) {
    alpha[j] = -1.0;
    beta[j] = beta_on;
  }
  if (spec.setup == DgpSetup::dense) {
    const double off = 1.0 / spec.p;
    for (int j = spec.s; j < spec.p; ++j) {
      alpha[j] = off;
      beta[j] = off;
    }
  }
}

DgpDraw assemble(const DgpSpec& spec, const Matrix& x, const Vector& eps) {
  spec.validate();
  if (x.rows() != spec.T || x.cols() != spec.p || eps.size() != spec.T)
    throw Error(ErrorKind::usage, "assemble: shape mismatch");
  DgpDraw draw;
  draw.x = x;
  draw.y.resize(spec.T);
  Vector alpha, beta;
  for (int t = 0; t < spec.T; ++t) {
    dgp_coefficients(spec, t + 1, alpha, beta);
    draw.y[t] = x.row(t).dot(alpha) + x.row(t).dot(beta) * eps[t];
  }
  for (int j = 0; j < spec.s; ++j) draw.true_support.push_back(j);
  return draw;
}

DgpDraw generate(const DgpSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  std::normal_distribution<double> normal;
  Matrix x(spec.T, spec.p);
  for (int t = 0; t < spec.T; ++t)
    for (int j = 0; j < spec.p; ++j) x(t, j) = std::abs(normal(rng));
  Vector eps(spec.T);
  for (int t = 0; t < spec.T; ++t) eps[t] = normal(rng);
  return assemble(spec, x, eps);
}

SimulationReport run_study(const DgpSpec& spec, const std::string& method,
                           const SelectorFn& fit, QuantileLevel tau,
                           int n_reps) {
  spec.validate();
  if (n_reps < 1) throw Error(ErrorKind::usage, "run_study: need n_reps >= 1");

  std::vector<IndexSet> selections(n_reps);
  std::vector<char> ok(n_reps, 0);
  par::parallel_for(n_reps, [&](std::ptrdiff_t r) {
    try {
      std::mt19937_64 rng = make_engine(spec.seed, static_cast<std::uint64_t>(r));
      DgpDraw draw = generate(spec, rng);
      selections[r] = fit(draw.y, draw.x, tau);
      ok[r] = 1;
    } catch (const std::exception&) {
      ok[r] = 0;
    }
  });

  SimulationReport report;
  report.method = method;
  report.per_relevant_frequency.assign(spec.s, 0.0);
  int succeeded = 0;
  double false_total = 0.0;
  for (int r = 0; r < n_reps; ++r) {
    if (!ok[r]) continue;
    ++succeeded;
    for (int j : selections[r]) {
      if (j >= 0 && j < spec.s)
        report.per_relevant_frequency[j] += 1.0;
      else
        false_total += 1.0;
    }
  }
  report.n_reps = succeeded;
  report.n_failures = n_reps - succeeded;
  if (succeeded > 0) {
    for (double& f : report.per_relevant_frequency) f /= succeeded;
    report.avg_false = false_total / succeeded;
  }
  return report;
}

}  // namespace gar
