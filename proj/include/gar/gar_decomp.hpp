#pragma once

#include <string>

#include "gar/backtest.hpp"
#include "gar/date.hpp"
#include "gar/types.hpp"

namespace gar {

// Named disjoint column groups covering {0..p-1}; the reserved "constant"
// component maps to the intercept and carries no columns.
struct GroupPartition {
  struct Group {
    std::string name;
    IndexSet indices;       // sorted
    bool is_constant = false;
  };
  std::vector<Group> groups;

  void validate(Eigen::Index p) const;
  /// Groups from per-column labels (empty labels fall into "other"), plus
  /// the constant component.
  static GroupPartition from_labels(const std::vector<std::string>& labels);
};

/// Sum of beta_j * x_j over the group; the constant group contributes the
/// intercept.
double contribution(const QuantileModel& model,
                    const Eigen::Ref<const Vector>& x,
                    const GroupPartition::Group& group);

struct ContributionSeries {
  std::vector<Date> dates;
  std::vector<std::string> group_names;
  Matrix values;     // one row per date, one column per group
  Vector predicted;  // full predicted quantile per date
};

/// Per-date group contributions from a backtest's per-window models; the
/// rows sum to the predicted quantile (enforced to 1e-10 relative).
ContributionSeries decompose_series(const std::vector<WindowModelRecord>& records,
                                    const GroupPartition& partition);

struct SectorIndex {
  std::vector<Date> dates;  // after the smoothing burn-in
  Vector raw;               // aligned with dates
  Vector smoothed;
  bool standardized = false;
  double mean_used = 0.0;
  double std_used = 1.0;
  int smooth_window = 1;
};

/// Trailing moving average of the given width, then optional
/// standardization to zero mean and unit variance over the surviving span.
SectorIndex build_index(const std::vector<Date>& dates, const Vector& values,
                        int smooth_window, bool standardize);

struct DatedSeries {
  std::string label;
  std::vector<Date> dates;
  Vector values;
};

struct CorrelationResult {
  std::vector<std::string> labels;
  Matrix r;                 // symmetric, unit diagonal
  Matrix z;                 // r sqrt((T-2)/(1-r^2)); 0 on the diagonal
  Eigen::MatrixXi stars;    // 0..3 stars at 10/5/1 percent, two-sided normal
  Eigen::MatrixXi overlap;  // common observations per pair
};

/// Pairwise correlations over common dates with the z-statistic against a
/// zero-correlation null.
CorrelationResult correlation_matrix(const std::vector<DatedSeries>& series);

}  // namespace gar
