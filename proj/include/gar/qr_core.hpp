#pragma once

#include "gar/types.hpp"

namespace gar {

/// Quantile loss rho_tau(u) = u * (tau - 1(u < 0)).
inline double rho(QuantileLevel tau, double u) {
  return u * (tau.tau() - (u < 0.0 ? 1.0 : 0.0));
}

/// Subgradient psi_tau(u) = tau - 1(u < 0); the indicator is 0 at u == 0.
inline double psi(QuantileLevel tau, double u) {
  return tau.tau() - (u < 0.0 ? 1.0 : 0.0);
}

inline double mean_quantile_loss(QuantileLevel tau, const Vector& residuals) {
  double acc = 0.0;
  for (Eigen::Index t = 0; t < residuals.size(); ++t)
    acc += rho(tau, residuals[t]);
  return acc / static_cast<double>(residuals.size());
}

struct QrOptions {
  double tol = 1e-8;    // relative primal-dual gap
  int max_iter = 200;
};

struct FitResult {
  Vector coefficients;    // over the supplied columns, excludes intercept
  double intercept = 0.0;
  double objective = 0.0;  // mean quantile loss at the optimum
  int iterations = 0;
  bool converged = false;
  // Row duals in [0, weight_i]; psi-hat_i = dual_i - weight_i*(1-tau_i) is
  // the solver's subgradient certificate (Z' psi-hat ~ 0).
  Vector dual;
};

/// Exact linear quantile regression on a fixed column set via a
/// Frisch-Newton primal-dual interior point on the bounded-variables dual.
/// Throws RankDeficient on collinear designs and NoConvergence when the
/// iteration cap leaves a gap far above tolerance; a mildly unconverged
/// solution is returned with converged = false.
FitResult fit_qr(const Vector& y, const Matrix& x_s, QuantileLevel tau,
                 bool include_intercept = true, const QrOptions& opts = {});

/// Weighted per-row-quantile core: minimizes sum_i w_i rho_{tau_i}(y_i - z_i'b)
/// over the full design z (caller appends any intercept column). Used by
/// fit_qr and by the penalized solver's pseudo-observation formulation.
FitResult solve_weighted_qr(const Matrix& z, const Vector& y,
                            const Vector& row_tau, const Vector& row_weight,
                            const QrOptions& opts = {});

struct OlsProjection {
  Vector theta;       // includes a leading intercept whenever x_s is nonempty
  Vector residual;
  double residual_var;  // mean squared residual (divisor T)
};

/// Least-squares projection of x_j on [1, x_s]; with an empty conditioning
/// set the projection is onto nothing (residual = x_j, uncentered moment).
OlsProjection ols_project(const Vector& x_j, const Matrix& x_s);

/// Smallest observed value whose weighted CDF reaches tau.
double weighted_quantile(const Vector& values, const Vector& weights,
                         QuantileLevel tau);

/// Unweighted convenience: inf{v observed : #(values <= v)/n >= tau}.
double empirical_quantile(const Vector& values, QuantileLevel tau);

}  // namespace gar
