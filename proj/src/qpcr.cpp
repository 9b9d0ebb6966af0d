#include "gar/qpcr.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gar/parallel.hpp"

namespace gar {

QpcrConfig QpcrConfig::defaults(Eigen::Index t_len, QuantileLevel tau) {
  if (t_len < 3) throw Error(ErrorKind::usage, "sample too small for defaults");
  const int d_max = static_cast<int>(std::floor(static_cast<double>(t_len) /
                                                std::log(static_cast<double>(t_len))));
  const int root = std::max(1, static_cast<int>(std::floor(std::sqrt(
                                 static_cast<double>(d_max)))));
  QpcrConfig cfg{tau};
  cfg.d_max = std::max(1, d_max);
  cfg.d_star = root;
  cfg.m_schedule.assign(root, root);
  cfg.ebic_c = 1.0;
  return cfg;
}

void QpcrConfig::validate() const {
  if (d_star < 1 || d_star > d_max)
    throw Error(ErrorKind::usage, "require 1 <= d_star <= d_max");
  if (static_cast<int>(m_schedule.size()) != d_star)
    throw Error(ErrorKind::usage, "m_schedule must have d_star entries");
  for (int m : m_schedule)
    if (m < 1) throw Error(ErrorKind::usage, "all m_d must be >= 1");
  if (ebic_c < 0.0) throw Error(ErrorKind::usage, "ebic_c must be >= 0");
}

double sample_qpcor(const Vector& y, const Vector& x_j, const Matrix& x_s,
                    QuantileLevel tau) {
  const auto t_len = static_cast<double>(y.size());
  FitResult alpha = fit_qr(y, x_s, tau, true);
  Vector resid = y;
  if (x_s.cols() > 0) resid -= x_s * alpha.coefficients;
  resid.array() -= alpha.intercept;

  OlsProjection proj = ols_project(x_j, x_s);
  if (proj.residual_var <= 1e-12)
    throw DegeneratePredictor("candidate numerically in the span of the set");

  double num = 0.0;
  for (Eigen::Index t = 0; t < y.size(); ++t)
    num += psi(tau, resid[t]) * proj.residual[t];
  num /= t_len;
  return num / std::sqrt(tau.tau() * (1.0 - tau.tau()) * proj.residual_var);
}

Matrix pearson_correlation(const Matrix& x) {
  const Eigen::Index p = x.cols();
  Matrix centered = x.rowwise() - x.colwise().mean();
  Vector norms(p);
  for (Eigen::Index j = 0; j < p; ++j) norms[j] = centered.col(j).norm();
  Matrix corr = centered.transpose() * centered;
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b) {
      const double denom = norms[a] * norms[b];
      corr(a, b) = denom > 0.0 ? corr(a, b) / denom : std::nan("");
    }
  return corr;
}

IndexSet confounding_set(const Matrix& corr, int j, int m) {
  const int p = static_cast<int>(corr.cols());
  if (m > p - 1) throw Error(ErrorKind::usage, "confounding_set: m > p-1");
  std::vector<double> mags;
  mags.reserve(p - 1);
  for (int k = 0; k < p; ++k) {
    if (k == j) continue;
    const double a = std::abs(corr(j, k));
    if (std::isfinite(a)) mags.push_back(a);
  }
  IndexSet out;
  if (mags.empty() || m < 1) return out;
  const int mm = std::min<int>(m, static_cast<int>(mags.size()));
  std::nth_element(mags.begin(), mags.begin() + (mm - 1), mags.end(),
                   std::greater<double>());
  const double threshold = mags[mm - 1];
  for (int k = 0; k < p; ++k) {
    if (k == j) continue;
    const double a = std::abs(corr(j, k));
    if (std::isfinite(a) && a >= threshold) out.push_back(k);
  }
  return out;
}

double ebic(double loss, double t_len, double d_size, double c) {
  if (loss < 0.0) throw NonPositiveLoss("loss " + std::to_string(loss));
  if (d_size < 1.0 || t_len <= 1.0)
    throw Error(ErrorKind::usage, "ebic: need D >= 1 and T > 1");
  const double floored = std::max(loss, 1e-12);
  return std::log(floored) + c * std::log(t_len) * std::log(d_size) / t_len;
}

double model_size_criterion(const QpcrConfig& config, double loss,
                            double t_len, double d_size, double p_cols) {
  if (config.size_criterion == SizeCriterion::display)
    return ebic(loss, t_len, d_size, config.ebic_c);
  const double floored = std::max(loss, 1e-12);
  return std::log(floored) + config.ebic_c * d_size * std::log(t_len) *
                                 std::log(std::max(p_cols, 2.0)) / (2.0 * t_len);
}

namespace {

struct ConditioningBasis {
  Matrix design;       // [1, independent columns of x_sbar]
  Eigen::LLT<Matrix> llt;
};

// A maximal independent subset spans the same space as the full set, so
// conditioning on it is equivalent and survives duplicated columns.
ConditioningBasis build_basis(const Matrix& x, const IndexSet& sbar) {
  ConditioningBasis basis;
  const Eigen::Index t_len = x.rows();
  if (sbar.empty()) {
    basis.design = Matrix::Ones(t_len, 1);
  } else {
    Matrix cols(t_len, sbar.size());
    for (size_t i = 0; i < sbar.size(); ++i) cols.col(i) = x.col(sbar[i]);
    Matrix centered = cols.rowwise() - cols.colwise().mean();
    Eigen::ColPivHouseholderQR<Matrix> qr(centered);
    const Eigen::Index r = qr.rank();
    const auto perm = qr.colsPermutation().indices();
    IndexSet kept;
    for (Eigen::Index i = 0; i < r; ++i) kept.push_back(sbar[perm[i]]);
    std::sort(kept.begin(), kept.end());
    basis.design.resize(t_len, r + 1);
    basis.design.col(0).setOnes();
    for (Eigen::Index i = 0; i < r; ++i)
      basis.design.col(i + 1) = x.col(kept[i]);
  }
  Matrix gram = basis.design.transpose() * basis.design;
  basis.llt.compute(gram);
  if (basis.llt.info() != Eigen::Success) {
    gram.diagonal().array() += 1e-10 * (gram.trace() / gram.rows() + 1.0);
    basis.llt.compute(gram);
    if (basis.llt.info() != Eigen::Success)
      throw RankDeficient("conditioning basis Gram not positive definite");
  }
  return basis;
}

// psi of the quantile fit on the conditioning basis (intercept included as
// the design's first column).
Vector qr_psi_residuals(const Vector& y, const ConditioningBasis& basis,
                        QuantileLevel tau) {
  const Eigen::Index t_len = y.size();
  FitResult fit = solve_weighted_qr(basis.design, y,
                                    Vector::Constant(t_len, tau.tau()),
                                    Vector::Ones(t_len));
  Vector resid = y - basis.design * fit.coefficients;
  Vector out(t_len);
  for (Eigen::Index t = 0; t < t_len; ++t) out[t] = psi(tau, resid[t]);
  return out;
}

}  // namespace

std::pair<QuantileModel, SelectionPath> fit_qpcr(const PanelData& panel,
                                                 const QpcrConfig& config) {
  config.validate();
  const Eigen::Index t_len = panel.T();
  const Eigen::Index p = panel.p();
  if (t_len == 0 || p == 0) throw EmptyPanel("fit_qpcr");
  if (t_len < 20) throw Error(ErrorKind::data, "fit_qpcr: need T >= 20");

  const Matrix& x = panel.x;
  const Vector& y = panel.y;
  const QuantileLevel tau = config.tau;
  const Matrix corr = p > 1 ? pearson_correlation(x) : Matrix::Ones(1, 1);

  SelectionPath path;
  std::set<int> conf_union;
  std::vector<char> in_sbar(p, 0);

  for (int d = 1; d <= config.d_max; ++d) {
    if (d >= 2 && d <= config.d_star && p > 1) {
      const int m_eff = std::min<int>(config.m_schedule[d - 1],
                                      static_cast<int>(p) - 1);
      if (m_eff >= 1) {
        if (config.confounding == ConfoundingEvolution::latest)
          conf_union.clear();
        for (int k : confounding_set(corr, path.ordered_selected.back(), m_eff))
          conf_union.insert(k);
      }
    }

    IndexSet sbar(path.ordered_selected.begin(), path.ordered_selected.end());
    sbar.insert(sbar.end(), conf_union.begin(), conf_union.end());
    std::sort(sbar.begin(), sbar.end());
    sbar.erase(std::unique(sbar.begin(), sbar.end()), sbar.end());

    std::fill(in_sbar.begin(), in_sbar.end(), 0);
    for (int k : sbar) in_sbar[k] = 1;
    IndexSet candidates;
    for (int j = 0; j < p; ++j)
      if (!in_sbar[j]) candidates.push_back(j);
    if (candidates.empty()) break;

    ConditioningBasis basis = build_basis(x, sbar);
    Vector psi_vec = qr_psi_residuals(y, basis, tau);

    Matrix cand(t_len, candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i)
      cand.col(i) = x.col(candidates[i]);
    Matrix theta = basis.llt.solve(basis.design.transpose() * cand);
    Matrix resid = cand - basis.design * theta;

    // per-candidate qpcor kernel; guard is relative so a rescaled column
    // keeps the argmax unchanged
    Vector qpc = Vector::Zero(candidates.size());
    const double tt = static_cast<double>(t_len);
    const double tau_var = tau.tau() * (1.0 - tau.tau());
    par::parallel_for(static_cast<std::ptrdiff_t>(candidates.size()), [&](std::ptrdiff_t i) {
      const double sigma2 = resid.col(i).squaredNorm() / tt;
      const double scale = cand.col(i).squaredNorm() / tt;
      if (sigma2 <= 1e-12 * std::max(scale, 1e-300)) {
        qpc[i] = std::nan("");
        return;
      }
      const double num = psi_vec.dot(resid.col(i)) / tt;
      qpc[i] = num / std::sqrt(tau_var * sigma2);
    });

    int best = -1;
    double best_mag = -1.0;
    for (size_t i = 0; i < candidates.size(); ++i) {
      const double mag = std::abs(qpc[i]);
      if (std::isfinite(mag) && mag > best_mag) {
        best_mag = mag;
        best = candidates[i];
      }
    }
    if (best < 0) break;  // every remaining candidate degenerate

    path.ordered_selected.push_back(best);
    path.confounding_history.push_back(sbar);
    path.qpc_trace.push_back(best_mag);
  }

  if (path.ordered_selected.empty())
    throw DegeneratePredictor("no admissible candidate at the first iteration");

  // EBIC model-size choice with a refit per prefix
  const int path_len = static_cast<int>(path.ordered_selected.size());
  path.ebic_curve.assign(path_len, 0.0);
  path.loss_curve.assign(path_len, 0.0);
  std::vector<Vector> coefs(path_len);
  std::vector<double> intercepts(path_len, 0.0);
  std::vector<std::string> failures(path_len);
  par::parallel_for(path_len, [&](std::ptrdiff_t di) {
    try {
      IndexSet s_d(path.ordered_selected.begin(),
                   path.ordered_selected.begin() + di + 1);
      std::sort(s_d.begin(), s_d.end());
      Matrix sub(t_len, s_d.size());
      for (size_t i = 0; i < s_d.size(); ++i) sub.col(i) = x.col(s_d[i]);
      FitResult fit = fit_qr(y, sub, tau, true);
      path.loss_curve[di] = fit.objective;
      path.ebic_curve[di] =
          model_size_criterion(config, fit.objective, static_cast<double>(t_len),
                               static_cast<double>(di + 1), static_cast<double>(p));
      coefs[di] = fit.coefficients;
      intercepts[di] = fit.intercept;
    } catch (const std::exception& e) {
      failures[di] = e.what();
    }
  });
  for (int di = 0; di < path_len; ++di)
    if (!failures[di].empty())
      throw NoConvergence("EBIC refit at D=" + std::to_string(di + 1) + ": " +
                          failures[di]);

  int d_best = 0;
  for (int di = 1; di < path_len; ++di)
    if (path.ebic_curve[di] < path.ebic_curve[d_best]) d_best = di;
  path.d_selected = d_best + 1;

  QuantileModel model;
  model.tau = tau.tau();
  model.intercept = intercepts[d_best];
  model.ebic_value = path.ebic_curve[d_best];
  model.beta = Vector::Zero(p);
  IndexSet s_d(path.ordered_selected.begin(),
               path.ordered_selected.begin() + d_best + 1);
  std::sort(s_d.begin(), s_d.end());
  model.active_set = s_d;
  for (size_t i = 0; i < s_d.size(); ++i) model.beta[s_d[i]] = coefs[d_best][i];
  return {std::move(model), std::move(path)};
}

}  // namespace gar
