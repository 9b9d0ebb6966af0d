#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "gar/dataset.hpp"
#include "gar/penalized_qr.hpp"
#include "gar/qpcr.hpp"
#include "gar/qrf.hpp"

namespace gar {

struct ForecastRecord {
  int window_index = 0;
  Date date;  // date of the realized target
  std::string method;
  double tau = 0.5;
  double predicted = 0.0;
  double realized = 0.0;
};

struct MethodOutput {
  double predicted = 0.0;
  std::optional<QuantileModel> model;  // linear methods only
};

using MethodFn = std::function<MethodOutput(const WindowView& window,
                                            QuantileLevel tau,
                                            std::uint64_t seed)>;

struct BacktestMethod {
  std::string label;
  MethodFn run;
};

struct WindowModelRecord {
  int window_index = 0;
  Date date;
  QuantileModel model;
  Vector x_next;
};

struct BacktestResult {
  std::vector<ForecastRecord> records;  // successes, (window, method) order
  std::map<std::string, int> failures;  // per-method failed window count
  std::map<std::string, std::vector<WindowModelRecord>> models;
  std::vector<std::string> column_names;
  double tau = 0.5;
};

/// Rolling one-step-ahead forecasts for every (window, method) pair. Each
/// task sees only its own training window; failures are counted per method
/// and the corresponding records dropped.
BacktestResult run_backtest(const PanelData& panel,
                            const RollingWindowPlan& plan,
                            const std::vector<BacktestMethod>& methods,
                            QuantileLevel tau,
                            WindowStandardize mode = WindowStandardize::per_window,
                            std::uint64_t seed = 0);

/// Mean quantile prediction error of one method's records.
double mpe(const std::vector<ForecastRecord>& records);

struct DmResult {
  double statistic = 0.0;
  double loss_diff_mean = 0.0;
  double hac_variance = 0.0;
  int n = 0;
  bool degenerate = false;
};

/// Diebold-Mariano comparison on the window-aligned intersection of two
/// record sets; negative statistics favor the first method. HAC variance is
/// Newey-West with a Bartlett kernel; lag < 0 picks floor(n^(1/3)).
DmResult diebold_mariano(const std::vector<ForecastRecord>& a,
                         const std::vector<ForecastRecord>& b, int lag = -1);

// Standard method adapters shared by the CLI, tests, and the study drivers.
BacktestMethod make_intercept_method();
BacktestMethod make_qpcr_method();
BacktestMethod make_pqr_method(PenaltyKind kind, const std::string& label,
                               int cv_folds = 5, int n_lambda = 50,
                               bool shuffle_folds = false);
BacktestMethod make_qrf_method(ForestVariant variant, int n_trees = 2000,
                               int min_leaf = 5, int mtry_extra = 20);
BacktestMethod make_garch_method(int n_boot = 100000);

}  // namespace gar
