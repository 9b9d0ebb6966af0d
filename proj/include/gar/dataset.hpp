#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gar/date.hpp"
#include "gar/types.hpp"

namespace gar {

// FRED-MD style panel straight from disk: header row of names, second row
// of transform codes, then dated rows. NaN marks a missing cell.
struct RawPanel {
  std::vector<Date> dates;
  Matrix values;  // T_raw x p
  std::vector<std::string> column_names;
  std::vector<int> transform_codes;  // 1..7
  std::vector<std::string> group_labels;
  int spacing_months = 1;  // 1 monthly, 3 quarterly

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

RawPanel load_fredmd_csv(const std::string& path);
void write_fredmd_csv(const RawPanel& raw, const std::string& path);

/// McCracken-Ng transform codes: 1 level, 2 diff, 3 double diff, 4 log,
/// 5 diff log, 6 double diff log, 7 diff of percent change. Leading rows
/// consumed by differencing become missing; dates are preserved.
RawPanel apply_transforms(const RawPanel& raw);

enum class MissingPolicy { listwise, forbid };

struct Standardization {
  bool applied = false;
  Vector mean;
  Vector std;  // sample std, divisor T-1
};

// Aligned supervised panel: row t of x is information dated t, y[t] is the
// target one step ahead. The target's own value at t stays in x as the
// "<target>.1" lag column and competes like any predictor.
struct PanelData {
  std::vector<Date> dates;  // information dates of the x rows
  Vector y;
  Matrix x;
  std::vector<std::string> column_names;
  std::vector<std::string> group_labels;
  Standardization standardization;
  std::string target_column;
  int lag_column = -1;
  int spacing_months = 1;
  // Final predictor row with no realized response yet (the forecast origin
  // for the step past the sample); empty when the last raw row is incomplete.
  Vector x_latest;
  Date x_latest_date;

  Eigen::Index T() const { return y.size(); }
  Eigen::Index p() const { return x.cols(); }
};

PanelData build_panel(const RawPanel& raw, const std::string& target_column,
                      bool standardize,
                      MissingPolicy policy = MissingPolicy::listwise);

/// Synthetic panel over already-aligned arrays (simulations, tests).
PanelData make_panel(const Vector& y, const Matrix& x,
                     std::vector<std::string> column_names = {});

struct RollingWindowPlan {
  int window_length = 0;
  int first_forecast_index = 0;  // row index of the first x_next
  int n_forecasts = 0;
};

enum class WindowStandardize { none, per_window };

struct WindowView {
  PanelData train;
  Vector x_next;
  double y_next = 0.0;
  Date forecast_date;  // date of the realized target
  int index = 0;
};

void validate_plan(const PanelData& panel, const RollingWindowPlan& plan);

/// Training pairs [f-L+i, f+i) with x_next = row f+i. Per-window
/// standardization uses training rows only and is applied to x_next with
/// the same statistics, so nothing after the window can leak in.
WindowView make_window(const PanelData& panel, const RollingWindowPlan& plan,
                       int i, WindowStandardize mode = WindowStandardize::per_window);

std::vector<WindowView> windows(const PanelData& panel,
                                const RollingWindowPlan& plan,
                                WindowStandardize mode = WindowStandardize::per_window);

}  // namespace gar
