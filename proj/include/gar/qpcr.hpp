#pragma once

#include <utility>

#include "gar/dataset.hpp"
#include "gar/qr_core.hpp"
#include "gar/types.hpp"

namespace gar {

// Model-size criterion used to pick D*. `display` is the flat-in-D
// log T * log D / T penalty; `extended` scales the complexity term by the
// model size and log p, which is what actually stops the path at the
// relevant set (see the qpcr notes in the README).
enum class SizeCriterion { display, extended };

// How the blocked set evolves across iterations: `latest` conditions on the
// most recent winner's confounding set only (blocking is transient),
// `accumulate` keeps the union over all past winners. Both freeze after
// d_star updates.
enum class ConfoundingEvolution { latest, accumulate };

struct QpcrConfig {
  QuantileLevel tau;
  int d_star = 1;                // confounding-set update count
  std::vector<int> m_schedule;   // m_1..m_{d_star}
  int d_max = 1;                 // selection iteration cap
  double ebic_c = 1.0;
  SizeCriterion size_criterion = SizeCriterion::extended;
  ConfoundingEvolution confounding = ConfoundingEvolution::latest;

  // Hyperparameters from the sample size: d_max = floor(T/log T),
  // d_star = m_d = floor(sqrt(d_max)), natural logs.
  static QpcrConfig defaults(Eigen::Index t_len, QuantileLevel tau);
  void validate() const;
};

/// Criterion value for a model of size d: log(floored loss) plus the
/// complexity penalty of the configured variant.
double model_size_criterion(const QpcrConfig& config, double loss,
                            double t_len, double d_size, double p_cols);

struct SelectionPath {
  IndexSet ordered_selected;                  // S_1 subset S_2 subset ...
  std::vector<IndexSet> confounding_history;  // Sbar_d per iteration
  std::vector<double> qpc_trace;              // winning |qpcor| per iteration
  std::vector<double> loss_curve;             // refit mean loss, D = 1..len
  std::vector<double> ebic_curve;             // criterion value per D
  int d_selected = 0;                         // D*
};

// Unified sparse linear fit result shared by all linear estimators.
struct QuantileModel {
  double tau = 0.5;
  IndexSet active_set;  // sorted
  Vector beta;          // full p-vector, zero off the active set
  double intercept = 0.0;
  double ebic_value = 0.0;

  double predict(const Eigen::Ref<const Vector>& x) const {
    return intercept + beta.dot(x);
  }
};

/// Sample quantile partial correlation of (y, x_j) given the columns of x_s:
/// mean(psi(qr residual) * ols residual) / sqrt(tau (1-tau) sigma2). The
/// quantile fit includes an intercept; the projection follows ols_project.
double sample_qpcor(const Vector& y, const Vector& x_j, const Matrix& x_s,
                    QuantileLevel tau);

Matrix pearson_correlation(const Matrix& x);

/// Indices k != j whose |corr(j,k)| is at least the m-th largest; ties at
/// the threshold are all included.
IndexSet confounding_set(const Matrix& corr, int j, int m);

double ebic(double loss, double t_len, double d_size, double c);

/// Forward selection by quantile partial correlation with confounding-set
/// blocking, model size chosen by EBIC, final coefficients refit on the
/// selected set.
std::pair<QuantileModel, SelectionPath> fit_qpcr(const PanelData& panel,
                                                 const QpcrConfig& config);

}  // namespace gar
