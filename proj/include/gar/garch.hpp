#pragma once

#include <random>

#include "gar/types.hpp"

namespace gar {

struct GarchParams {
  double phi0 = 0.0;   // mean equation intercept
  double phi1 = 0.0;   // AR(1) coefficient
  double omega = 0.0;  // variance intercept, > 0
  double alpha = 0.0;  // ARCH load, >= 0
  double gamma = 0.0;  // GARCH load, >= 0; alpha + gamma < 1
};

struct GarchFit {
  GarchParams params;
  Vector standardized_residuals;  // (y_t - mu_t) / sigma_t, t = 2..n
  Vector sigma_path;              // conditional std aligned with residuals
  Vector mu_path;                 // conditional mean aligned with residuals
  double loglik = 0.0;
  bool stationary_boundary = false;  // alpha + gamma pinned at the constraint
};

struct GarchOptions {
  int max_iter = 500;
  double grad_tol = 1e-7;  // transformed-space stopping rule
};

/// AR(1)-GARCH(1,1) by Gaussian quasi-maximum likelihood: BFGS on a
/// stationarity-respecting reparametrization with analytic gradients,
/// multi-started from three canonical points, variance recursion
/// initialized at the sample variance.
GarchFit fit_garch(const Vector& y, const GarchOptions& opts = {});

/// One-step conditional quantile mu + sigma * F^{-1}(tau) with F^{-1}
/// estimated from n_boot draws with replacement from the standardized
/// residuals. y_last and sigma_last must be the end-of-sample state of the
/// fit (the final observation and its fitted conditional std).
double forecast_quantile(const GarchFit& fit, double y_last, double sigma_last,
                         QuantileLevel tau, int n_boot, std::mt19937_64& rng);

}  // namespace gar
