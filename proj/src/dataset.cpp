#include "gar/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "gar/csv.hpp"

namespace gar {

namespace {

bool is_missing(double v) { return std::isnan(v); }

int parse_transform_code(const std::string& cell) {
  char* end = nullptr;
  long v = std::strtol(cell.c_str(), &end, 10);
  if (end == cell.c_str() || *end != '\0' || v < 1 || v > 7)
    throw MalformedCsv("transform code '" + cell + "' is not an integer in 1..7");
  return static_cast<int>(v);
}

Vector diff(const Vector& v) {
  Vector out = Vector::Constant(v.size(), std::nan(""));
  for (Eigen::Index t = 1; t < v.size(); ++t) out[t] = v[t] - v[t - 1];
  return out;
}

Vector log_checked(const Vector& v, const std::string& name) {
  Vector out = Vector::Constant(v.size(), std::nan(""));
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    if (is_missing(v[t])) continue;
    if (v[t] <= 0.0)
      throw NonPositiveForLog("column '" + name + "' has value " +
                              std::to_string(v[t]) + " under a log transform");
    out[t] = std::log(v[t]);
  }
  return out;
}

Vector pct_change(const Vector& v) {
  Vector out = Vector::Constant(v.size(), std::nan(""));
  for (Eigen::Index t = 1; t < v.size(); ++t) {
    if (is_missing(v[t]) || is_missing(v[t - 1]) || v[t - 1] == 0.0) continue;
    out[t] = v[t] / v[t - 1] - 1.0;
  }
  return out;
}

}  // namespace

RawPanel load_fredmd_csv(const std::string& path) {
  auto rows = read_csv(path);
  if (rows.size() < 3)
    throw MalformedCsv("need a header row, a code row and at least one data row");

  const auto& header = rows[0];
  if (header.size() < 2) throw MalformedCsv("header has no data columns");
  const size_t p = header.size() - 1;

  RawPanel raw;
  raw.column_names.assign(header.begin() + 1, header.end());
  {
    std::set<std::string> seen;
    for (const auto& name : raw.column_names)
      if (!seen.insert(name).second)
        throw DuplicateColumn("column '" + name + "' appears twice");
  }

  const auto& codes = rows[1];
  if (codes.size() != p + 1)
    throw MalformedCsv("code row has " + std::to_string(codes.size()) +
                       " fields, expected " + std::to_string(p + 1));
  raw.transform_codes.resize(p);
  for (size_t j = 0; j < p; ++j)
    raw.transform_codes[j] = parse_transform_code(codes[j + 1]);

  const size_t t_raw = rows.size() - 2;
  raw.values = Matrix::Constant(t_raw, p, std::nan(""));
  raw.dates.resize(t_raw);
  for (size_t i = 0; i < t_raw; ++i) {
    const auto& row = rows[i + 2];
    if (row.size() != p + 1)
      throw MalformedCsv("row " + std::to_string(i + 3) + " has " +
                         std::to_string(row.size()) + " fields, expected " +
                         std::to_string(p + 1));
    raw.dates[i] = parse_date(row[0]);
    for (size_t j = 0; j < p; ++j)
      raw.values(i, j) = parse_cell(row[j + 1]);
  }

  for (size_t i = 1; i < t_raw; ++i)
    if (!(raw.dates[i - 1] < raw.dates[i]))
      throw NonMonotoneDates("dates must be strictly increasing at row " +
                             std::to_string(i + 3));
  if (t_raw >= 2) {
    const int step = raw.dates[1].serial() - raw.dates[0].serial();
    if (step != 1 && step != 3)
      throw NonMonotoneDates("spacing must be monthly or quarterly");
    for (size_t i = 1; i < t_raw; ++i)
      if (raw.dates[i].serial() - raw.dates[i - 1].serial() != step)
        throw NonMonotoneDates("irregular date spacing at row " +
                               std::to_string(i + 3));
    raw.spacing_months = step;
  }
  raw.group_labels.assign(p, "");
  return raw;
}

void write_fredmd_csv(const RawPanel& raw, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::data, "cannot write '" + path + "'");
  out << "date";
  for (const auto& name : raw.column_names) out << ',' << name;
  out << '\n' << "Transform:";
  for (int code : raw.transform_codes) out << ',' << code;
  out << '\n';
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    out << raw.dates[i].to_string();
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      out << ',';
      if (!is_missing(raw.values(i, j))) out << format_full(raw.values(i, j));
    }
    out << '\n';
  }
}

RawPanel apply_transforms(const RawPanel& raw) {
  RawPanel out = raw;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const Vector col = raw.values.col(j);
    const std::string& name = raw.column_names[j];
    Vector v;
    switch (raw.transform_codes[j]) {
      case 1: v = col; break;
      case 2: v = diff(col); break;
      case 3: v = diff(diff(col)); break;
      case 4: v = log_checked(col, name); break;
      case 5: v = diff(log_checked(col, name)); break;
      case 6: v = diff(diff(log_checked(col, name))); break;
      case 7: v = diff(pct_change(col)); break;
      default:
        throw MalformedCsv("transform code out of range");
    }
    out.values.col(j) = v;
  }
  return out;
}

PanelData build_panel(const RawPanel& raw, const std::string& target_column,
                      bool standardize, MissingPolicy policy) {
  Eigen::Index target = -1;
  for (Eigen::Index j = 0; j < raw.cols(); ++j)
    if (raw.column_names[j] == target_column) target = j;
  if (target < 0)
    throw TargetMissing("column '" + target_column + "' not in panel");

  const Eigen::Index t_raw = raw.rows();
  const Eigen::Index p = raw.cols();
  if (t_raw < 2) throw EmptyAfterAlignment("need at least two rows");

  // candidate pairs t = 0..t_raw-2: x = row t, y = target at t+1
  std::vector<Eigen::Index> keep;
  for (Eigen::Index t = 0; t + 1 < t_raw; ++t) {
    bool complete = !is_missing(raw.values(t + 1, target));
    for (Eigen::Index j = 0; j < p && complete; ++j)
      if (is_missing(raw.values(t, j))) complete = false;
    if (complete) {
      keep.push_back(t);
    } else if (policy == MissingPolicy::forbid) {
      throw EmptyAfterAlignment("missing values at row " + std::to_string(t) +
                                " under the forbid policy");
    }
  }
  if (keep.empty()) throw EmptyAfterAlignment("no complete aligned rows");

  PanelData panel;
  panel.spacing_months = raw.spacing_months;
  panel.column_names = raw.column_names;
  panel.group_labels = raw.group_labels.empty()
                           ? std::vector<std::string>(p, "")
                           : raw.group_labels;
  panel.target_column = target_column;
  panel.lag_column = static_cast<int>(target);
  panel.column_names[target] = target_column + ".1";
  panel.group_labels[target] = "lag";

  const Eigen::Index t_len = static_cast<Eigen::Index>(keep.size());
  panel.y.resize(t_len);
  panel.x.resize(t_len, p);
  panel.dates.resize(t_len);
  for (Eigen::Index r = 0; r < t_len; ++r) {
    panel.x.row(r) = raw.values.row(keep[r]);
    panel.y[r] = raw.values(keep[r] + 1, target);
    panel.dates[r] = raw.dates[keep[r]];
  }

  // forecast origin: the last raw row, usable only if complete
  bool latest_complete = true;
  for (Eigen::Index j = 0; j < p; ++j)
    if (is_missing(raw.values(t_raw - 1, j))) latest_complete = false;
  if (latest_complete) {
    panel.x_latest = raw.values.row(t_raw - 1);
    panel.x_latest_date = raw.dates[t_raw - 1];
  }

  if (standardize) {
    panel.standardization.applied = true;
    panel.standardization.mean.resize(p);
    panel.standardization.std.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mean = panel.x.col(j).mean();
      const double ss = (panel.x.col(j).array() - mean).square().sum();
      const double sd = t_len > 1 ? std::sqrt(ss / (t_len - 1)) : 0.0;
      if (!(sd > 0.0))
        throw ZeroVarianceColumn("column '" + panel.column_names[j] + "'");
      panel.x.col(j) = (panel.x.col(j).array() - mean) / sd;
      panel.standardization.mean[j] = mean;
      panel.standardization.std[j] = sd;
      if (panel.x_latest.size() > 0)
        panel.x_latest[j] = (panel.x_latest[j] - mean) / sd;
    }
  }
  return panel;
}

PanelData make_panel(const Vector& y, const Matrix& x,
                     std::vector<std::string> column_names) {
  if (y.size() != x.rows())
    throw Error(ErrorKind::usage, "make_panel: row mismatch");
  PanelData panel;
  panel.y = y;
  panel.x = x;
  if (column_names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      column_names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(column_names.size()) != x.cols())
    throw Error(ErrorKind::usage, "make_panel: name count mismatch");
  panel.column_names = std::move(column_names);
  panel.group_labels.assign(panel.column_names.size(), "");
  panel.dates.resize(y.size());
  Date anchor{2000, 1, 1};
  for (Eigen::Index t = 0; t < y.size(); ++t)
    panel.dates[t] = anchor.plus_months(static_cast<int>(t));
  return panel;
}

void validate_plan(const PanelData& panel, const RollingWindowPlan& plan) {
  const Eigen::Index t_len = panel.T();
  if (plan.window_length < 1 || plan.n_forecasts < 1)
    throw PlanOutOfRange("window_length and n_forecasts must be positive");
  if (plan.first_forecast_index - plan.window_length < 0)
    throw PlanOutOfRange("first window starts before the sample");
  if (plan.first_forecast_index + plan.n_forecasts - 1 >= t_len)
    throw PlanOutOfRange("last forecast index " +
                         std::to_string(plan.first_forecast_index +
                                        plan.n_forecasts - 1) +
                         " exceeds sample length " + std::to_string(t_len));
}

WindowView make_window(const PanelData& panel, const RollingWindowPlan& plan,
                       int i, WindowStandardize mode) {
  validate_plan(panel, plan);
  if (i < 0 || i >= plan.n_forecasts)
    throw PlanOutOfRange("window index " + std::to_string(i));

  const int lo = plan.first_forecast_index - plan.window_length + i;
  const int next = plan.first_forecast_index + i;
  const int len = plan.window_length;

  WindowView w;
  w.index = i;
  w.train.spacing_months = panel.spacing_months;
  w.train.column_names = panel.column_names;
  w.train.group_labels = panel.group_labels;
  w.train.target_column = panel.target_column;
  w.train.lag_column = panel.lag_column;
  w.train.y = panel.y.segment(lo, len);
  w.train.x = panel.x.middleRows(lo, len);
  w.train.dates.assign(panel.dates.begin() + lo, panel.dates.begin() + lo + len);
  w.x_next = panel.x.row(next);
  w.y_next = panel.y[next];
  w.forecast_date = panel.dates[next].plus_months(panel.spacing_months);

  if (mode == WindowStandardize::per_window) {
    const Eigen::Index p = panel.p();
    w.train.standardization.applied = true;
    w.train.standardization.mean.resize(p);
    w.train.standardization.std.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double mean = w.train.x.col(j).mean();
      const double ss = (w.train.x.col(j).array() - mean).square().sum();
      const double sd = len > 1 ? std::sqrt(ss / (len - 1)) : 0.0;
      if (!(sd > 0.0))
        throw ZeroVarianceColumn("column '" + panel.column_names[j] +
                                 "' constant inside window " + std::to_string(i));
      w.train.x.col(j) = (w.train.x.col(j).array() - mean) / sd;
      w.x_next[j] = (w.x_next[j] - mean) / sd;
      w.train.standardization.mean[j] = mean;
      w.train.standardization.std[j] = sd;
    }
  }
  return w;
}

std::vector<WindowView> windows(const PanelData& panel,
                                const RollingWindowPlan& plan,
                                WindowStandardize mode) {
  validate_plan(panel, plan);
  std::vector<WindowView> out;
  out.reserve(plan.n_forecasts);
  for (int i = 0; i < plan.n_forecasts; ++i)
    out.push_back(make_window(panel, plan, i, mode));
  return out;
}

}  // namespace gar
