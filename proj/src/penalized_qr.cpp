#include "gar/penalized_qr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gar/parallel.hpp"
#include "gar/rng.hpp"

namespace gar {

void PenaltySpec::validate() const {
  if (lambda < 0.0) throw Error(ErrorKind::usage, "lambda must be >= 0");
  if (kind == PenaltyKind::scad && !(a > 2.0))
    throw Error(ErrorKind::usage, "SCAD requires a > 2");
  if (kind == PenaltyKind::mcp && !(a > 1.0))
    throw Error(ErrorKind::usage, "MCP requires a > 1");
}

double penalty_value(const PenaltySpec& spec, double b) {
  spec.validate();
  const double x = std::abs(b);
  const double l = spec.lambda, a = spec.a;
  switch (spec.kind) {
    case PenaltyKind::l1:
      return l * x;
    case PenaltyKind::scad:
      if (x <= l) return l * x;
      if (x < a * l) return (2.0 * a * l * x - x * x - l * l) / (2.0 * (a - 1.0));
      return l * l * (a + 1.0) / 2.0;
    case PenaltyKind::mcp:
      if (x < a * l) return l * x - x * x / (2.0 * a);
      return a * l * l / 2.0;
  }
  return 0.0;
}

double penalty_derivative(const PenaltySpec& spec, double b) {
  spec.validate();
  if (b < 0.0) throw Error(ErrorKind::usage, "penalty_derivative: b must be >= 0");
  const double l = spec.lambda, a = spec.a;
  switch (spec.kind) {
    case PenaltyKind::l1:
      return l;
    case PenaltyKind::scad:
      if (b <= l) return l;
      return std::max(a * l - b, 0.0) / (a - 1.0);
    case PenaltyKind::mcp:
      return b <= a * l ? l - b / a : 0.0;
  }
  return 0.0;
}

namespace {

// Weighted l1 quantile program via pseudo-observations: each penalized
// coefficient j contributes 2 T lam_j * rho_{1/2}(-beta_j) = T lam_j |beta_j|,
// so the LP objective is T * [(1/T) sum rho_tau + sum lam_j |beta_j|].
FitResult solve_l1_program(const Matrix& x, const Vector& y, QuantileLevel tau,
                           const Vector& lam, const QrOptions& inner) {
  const Eigen::Index t_len = y.size();
  const Eigen::Index p = x.cols();
  Eigen::Index n_pseudo = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    if (lam[j] > 0.0) ++n_pseudo;

  Matrix z = Matrix::Zero(t_len + n_pseudo, p + 1);
  Vector yy = Vector::Zero(t_len + n_pseudo);
  Vector tt(t_len + n_pseudo), ww(t_len + n_pseudo);
  z.col(0).head(t_len).setOnes();
  z.block(0, 1, t_len, p) = x;
  yy.head(t_len) = y;
  tt.head(t_len).setConstant(tau.tau());
  ww.head(t_len).setOnes();
  Eigen::Index r = t_len;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (lam[j] <= 0.0) continue;
    z(r, j + 1) = 1.0;
    tt[r] = 0.5;
    ww[r] = 2.0 * static_cast<double>(t_len) * lam[j];
    ++r;
  }
  return solve_weighted_qr(z, yy, tt, ww, inner);
}

double penalized_objective(const Matrix& x, const Vector& y, QuantileLevel tau,
                           const PenaltySpec& spec, double intercept,
                           const Vector& beta) {
  Vector resid = y - x * beta;
  resid.array() -= intercept;
  double obj = mean_quantile_loss(tau, resid);
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    obj += penalty_value(spec, beta[j]);
  return obj;
}

// Interior-point zeros are only fuzz; snap them where a positive penalty was
// active at the final solve.
void round_zeros(Vector& beta, const Vector& lam, const Matrix& x,
                 const Vector& y) {
  const double y_scale = std::max(1.0, std::sqrt(y.squaredNorm() / y.size()));
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (lam[j] <= 0.0) continue;
    const double x_scale =
        std::max(std::sqrt(x.col(j).squaredNorm() / x.rows()), 1e-12);
    if (std::abs(beta[j]) * x_scale <= 1e-7 * y_scale) beta[j] = 0.0;
  }
}

}  // namespace

QuantileModel fit_penalized(const PanelData& panel, QuantileLevel tau,
                            const PenaltySpec& spec, const PqrOptions& opts,
                            PqrDiagnostics* diag) {
  spec.validate();
  const Eigen::Index t_len = panel.T();
  const Eigen::Index p = panel.p();
  if (t_len == 0 || p == 0) throw EmptyPanel("fit_penalized");
  const Matrix& x = panel.x;
  const Vector& y = panel.y;

  Vector lam = Vector::Constant(p, spec.lambda);
  FitResult fit = solve_l1_program(x, y, tau, lam, opts.inner);
  double intercept = fit.coefficients[0];
  Vector beta = fit.coefficients.tail(p);

  if (diag) {
    diag->objective_trace.clear();
    diag->objective_trace.push_back(
        penalized_objective(x, y, tau, spec, intercept, beta));
    diag->outer_iterations = 0;
  }

  if (spec.kind != PenaltyKind::l1 && spec.lambda > 0.0) {
    // local linear approximation around the previous iterate
    bool settled = false;
    for (int outer = 0; outer < opts.max_outer; ++outer) {
      for (Eigen::Index j = 0; j < p; ++j)
        lam[j] = penalty_derivative(spec, std::abs(beta[j]));
      FitResult step = solve_l1_program(x, y, tau, lam, opts.inner);
      Vector beta_new = step.coefficients.tail(p);
      const double change = (beta_new - beta).cwiseAbs().maxCoeff();
      intercept = step.coefficients[0];
      beta = beta_new;
      if (diag) {
        diag->objective_trace.push_back(
            penalized_objective(x, y, tau, spec, intercept, beta));
        diag->outer_iterations = outer + 1;
      }
      if (change <= opts.outer_tol * std::max(1.0, beta.cwiseAbs().maxCoeff())) {
        settled = true;
        break;
      }
    }
    if (!settled) {
      // accept a slow tail only if the iterate is essentially stationary
      for (Eigen::Index j = 0; j < p; ++j)
        lam[j] = penalty_derivative(spec, std::abs(beta[j]));
      FitResult probe = solve_l1_program(x, y, tau, lam, opts.inner);
      const double drift =
          (probe.coefficients.tail(p) - beta).cwiseAbs().maxCoeff();
      if (drift > 0.1 * (1.0 + beta.cwiseAbs().maxCoeff()))
        throw NoConvergence("LLA loop still moving after " +
                            std::to_string(opts.max_outer) + " steps");
    }
  }

  round_zeros(beta, lam, x, y);

  QuantileModel model;
  model.tau = tau.tau();
  model.intercept = intercept;
  model.beta = beta;
  for (Eigen::Index j = 0; j < p; ++j)
    if (beta[j] != 0.0) model.active_set.push_back(static_cast<int>(j));
  Vector resid = y - x * beta;
  resid.array() -= intercept;
  const double loss = mean_quantile_loss(tau, resid);
  model.ebic_value = ebic(loss, static_cast<double>(t_len),
                          std::max<double>(1.0, model.active_set.size()), 1.0);
  return model;
}

double lambda_max(const PanelData& panel, QuantileLevel tau) {
  const Eigen::Index t_len = panel.T();
  const double q = empirical_quantile(panel.y, tau);
  Vector psi_vec(t_len);
  Eigen::Index kink = -1;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    psi_vec[t] = psi(tau, panel.y[t] - q);
    if (kink < 0 && panel.y[t] == q) kink = t;
  }
  // intercept stationarity must bind at the all-zero solution: shift the
  // kink row's subgradient so the psi values sum to zero
  const double slack = psi_vec.sum();
  if (kink >= 0 && slack > 0.0 && slack <= 1.0) psi_vec[kink] -= slack;
  Vector corr = panel.x.transpose() * psi_vec;
  return corr.cwiseAbs().maxCoeff() / static_cast<double>(t_len);
}

void CvGrid::validate() const {
  if (n_folds < 2) throw Error(ErrorKind::usage, "need at least 2 folds");
  if (lambdas.empty()) throw Error(ErrorKind::usage, "empty lambda grid");
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < 0.0) throw Error(ErrorKind::usage, "negative lambda");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
      throw Error(ErrorKind::usage, "lambdas must be strictly decreasing");
  }
  if (a_values.empty()) throw Error(ErrorKind::usage, "empty a grid");
}

CvGrid default_grid(const PanelData& panel, QuantileLevel tau, PenaltyKind kind,
                    int n_lambda) {
  CvGrid grid;
  const double top = lambda_max(panel, tau);
  const double bottom = 1e-3 * top;
  grid.lambdas.resize(n_lambda);
  if (n_lambda == 1) {
    grid.lambdas[0] = top;
  } else {
    const double step = std::log(top / bottom) / (n_lambda - 1);
    for (int i = 0; i < n_lambda; ++i)
      grid.lambdas[i] = top * std::exp(-step * i);
  }
  switch (kind) {
    case PenaltyKind::scad: grid.a_values = {3.7}; break;
    case PenaltyKind::mcp: grid.a_values = {3.0}; break;
    case PenaltyKind::l1: grid.a_values = {0.0}; break;
  }
  return grid;
}

PenaltySpec cross_validate(const PanelData& panel, QuantileLevel tau,
                           PenaltyKind kind, const CvGrid& grid) {
  grid.validate();
  const Eigen::Index t_len = panel.T();
  if (t_len < 2 * grid.n_folds)
    throw Error(ErrorKind::data, "sample too small for the fold count");

  std::vector<int> order(t_len);
  std::iota(order.begin(), order.end(), 0);
  if (grid.shuffle) {
    std::mt19937_64 rng = make_engine(grid.seed, 0);
    std::shuffle(order.begin(), order.end(), rng);
  }

  // contiguous blocks over the (possibly shuffled) order
  std::vector<std::pair<int, int>> folds;  // [begin, end)
  const int base = static_cast<int>(t_len) / grid.n_folds;
  const int extra = static_cast<int>(t_len) % grid.n_folds;
  int at = 0;
  for (int f = 0; f < grid.n_folds; ++f) {
    const int len = base + (f < extra ? 1 : 0);
    folds.push_back({at, at + len});
    at += len;
  }

  struct Task {
    int fold;
    size_t ia, il;
  };
  std::vector<Task> tasks;
  for (size_t ia = 0; ia < grid.a_values.size(); ++ia)
    for (size_t il = 0; il < grid.lambdas.size(); ++il)
      for (int f = 0; f < grid.n_folds; ++f)
        tasks.push_back({f, ia, il});

  const Eigen::Index p = panel.p();
  std::vector<double> loss(tasks.size(), std::nan(""));
  std::vector<char> failed(tasks.size(), 0);
  par::parallel_for(static_cast<std::ptrdiff_t>(tasks.size()), [&](std::ptrdiff_t ti) {
    const Task& task = tasks[ti];
    try {
      const auto [fb, fe] = folds[task.fold];
      const Eigen::Index n_test = fe - fb;
      const Eigen::Index n_train = t_len - n_test;
      Matrix x_train(n_train, p), x_test(n_test, p);
      Vector y_train(n_train), y_test(n_test);
      Eigen::Index rt = 0, rs = 0;
      for (Eigen::Index i = 0; i < t_len; ++i) {
        const int row = order[i];
        if (i >= fb && i < fe) {
          x_test.row(rs) = panel.x.row(row);
          y_test[rs++] = panel.y[row];
        } else {
          x_train.row(rt) = panel.x.row(row);
          y_train[rt++] = panel.y[row];
        }
      }
      PanelData sub = make_panel(y_train, x_train, panel.column_names);
      PenaltySpec spec{kind, grid.lambdas[task.il], grid.a_values[task.ia]};
      QuantileModel model = fit_penalized(sub, tau, spec);
      Vector pred = x_test * model.beta;
      pred.array() += model.intercept;
      loss[ti] = mean_quantile_loss(tau, y_test - pred);
    } catch (const std::exception&) {
      failed[ti] = 1;
    }
  });

  // average per grid point; any failed fold disqualifies the point
  double best_loss = std::numeric_limits<double>::infinity();
  int best_ia = -1, best_il = -1;
  int skipped = 0;
  for (size_t ia = 0; ia < grid.a_values.size(); ++ia) {
    for (size_t il = 0; il < grid.lambdas.size(); ++il) {
      double acc = 0.0;
      bool ok = true;
      for (size_t ti = 0; ti < tasks.size(); ++ti) {
        if (tasks[ti].ia != ia || tasks[ti].il != il) continue;
        if (failed[ti])
          ok = false;
        else
          acc += loss[ti];
      }
      if (!ok) {
        ++skipped;
        continue;
      }
      acc /= grid.n_folds;
      if (acc < best_loss) {  // strict: earlier (larger) lambda wins ties
        best_loss = acc;
        best_ia = static_cast<int>(ia);
        best_il = static_cast<int>(il);
      }
    }
  }
  if (best_il < 0)
    throw NoConvergence("every cross-validation grid point failed (" +
                        std::to_string(skipped) + " skipped)");
  return PenaltySpec{kind, grid.lambdas[best_il], grid.a_values[best_ia]};
}

}  // namespace gar
