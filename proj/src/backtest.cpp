#include "gar/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "gar/garch.hpp"
#include "gar/parallel.hpp"
#include "gar/rng.hpp"

namespace gar {

BacktestResult run_backtest(const PanelData& panel,
                            const RollingWindowPlan& plan,
                            const std::vector<BacktestMethod>& methods,
                            QuantileLevel tau, WindowStandardize mode,
                            std::uint64_t seed) {
  validate_plan(panel, plan);
  if (methods.empty())
    throw Error(ErrorKind::usage, "run_backtest: no methods");

  const int n_windows = plan.n_forecasts;
  const int n_methods = static_cast<int>(methods.size());
  const int n_tasks = n_windows * n_methods;

  struct Slot {
    bool ok = false;
    ForecastRecord record;
    std::optional<QuantileModel> model;
    Vector x_next;
  };
  std::vector<Slot> slots(n_tasks);

  par::parallel_for(n_tasks, [&](std::ptrdiff_t ti) {
    const int w = static_cast<int>(ti) / n_methods;
    const int m = static_cast<int>(ti) % n_methods;
    Slot& slot = slots[ti];
    try {
      WindowView view = make_window(panel, plan, w, mode);
      MethodOutput out =
          methods[m].run(view, tau, derive_seed(seed, static_cast<std::uint64_t>(ti)));
      if (!std::isfinite(out.predicted))
        throw Error(ErrorKind::numeric, "non-finite prediction");
      slot.record = {w, view.forecast_date, methods[m].label, tau.tau(),
                     out.predicted, view.y_next};
      slot.model = std::move(out.model);
      slot.x_next = view.x_next;
      slot.ok = true;
    } catch (const std::exception&) {
      slot.ok = false;
    }
  });

  BacktestResult result;
  result.column_names = panel.column_names;
  result.tau = tau.tau();
  for (const auto& method : methods) result.failures[method.label] = 0;
  for (int ti = 0; ti < n_tasks; ++ti) {
    const int m = ti % n_methods;
    Slot& slot = slots[ti];
    if (!slot.ok) {
      ++result.failures[methods[m].label];
      continue;
    }
    result.records.push_back(slot.record);
    if (slot.model) {
      result.models[methods[m].label].push_back(
          {slot.record.window_index, slot.record.date, std::move(*slot.model),
           std::move(slot.x_next)});
    }
  }
  return result;
}

double mpe(const std::vector<ForecastRecord>& records) {
  if (records.empty()) throw EmptyRecords("mpe");
  double acc = 0.0;
  for (const auto& r : records)
    acc += rho(QuantileLevel{r.tau}, r.realized - r.predicted);
  return acc / static_cast<double>(records.size());
}

DmResult diebold_mariano(const std::vector<ForecastRecord>& a,
                         const std::vector<ForecastRecord>& b, int lag) {
  std::map<int, const ForecastRecord*> bmap;
  for (const auto& r : b) bmap[r.window_index] = &r;

  std::vector<double> d;
  for (const auto& ra : a) {
    auto it = bmap.find(ra.window_index);
    if (it == bmap.end()) continue;
    const ForecastRecord& rb = *it->second;
    if (ra.realized != rb.realized || ra.tau != rb.tau)
      throw MisalignedRecords("window " + std::to_string(ra.window_index));
    const double la = rho(QuantileLevel{ra.tau}, ra.realized - ra.predicted);
    const double lb = rho(QuantileLevel{rb.tau}, rb.realized - rb.predicted);
    d.push_back(la - lb);
  }
  const int n = static_cast<int>(d.size());
  if (n < 8)
    throw Error(ErrorKind::data,
                "diebold_mariano: need at least 8 aligned records, have " +
                    std::to_string(n));

  DmResult out;
  out.n = n;
  bool all_equal = true;
  for (double v : d)
    if (v != d[0]) all_equal = false;
  if (all_equal) {
    out.degenerate = true;
    out.loss_diff_mean = d[0];
    out.hac_variance = 0.0;
    if (d[0] == 0.0)
      out.statistic = 0.0;
    else
      out.statistic = d[0] > 0.0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    return out;
  }

  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  out.loss_diff_mean = mean;

  const int max_lag = lag >= 0 ? lag : static_cast<int>(std::floor(std::cbrt(n)));
  double hac = 0.0;
  for (int l = 0; l <= std::min(max_lag, n - 1); ++l) {
    double gamma_l = 0.0;
    for (int t = l; t < n; ++t) gamma_l += (d[t] - mean) * (d[t - l] - mean);
    gamma_l /= n;
    hac += (l == 0 ? 1.0 : 2.0 * (1.0 - static_cast<double>(l) / (max_lag + 1))) *
           gamma_l;
  }
  out.hac_variance = std::max(hac, 0.0);

  if (out.hac_variance <= 1e-300) {
    out.degenerate = true;
    if (std::abs(mean) <= 1e-300)
      out.statistic = 0.0;
    else
      out.statistic = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    return out;
  }
  out.statistic = mean / std::sqrt(out.hac_variance / n);
  return out;
}

BacktestMethod make_intercept_method() {
  return {"intercept", [](const WindowView& w, QuantileLevel tau, std::uint64_t) {
            MethodOutput out;
            out.predicted = empirical_quantile(w.train.y, tau);
            QuantileModel model;
            model.tau = tau.tau();
            model.intercept = out.predicted;
            model.beta = Vector::Zero(w.train.p());
            out.model = model;
            return out;
          }};
}

BacktestMethod make_qpcr_method() {
  return {"qpcr", [](const WindowView& w, QuantileLevel tau, std::uint64_t) {
            QpcrConfig cfg = QpcrConfig::defaults(w.train.T(), tau);
            auto [model, path] = fit_qpcr(w.train, cfg);
            MethodOutput out;
            out.predicted = model.predict(w.x_next);
            out.model = std::move(model);
            return out;
          }};
}

BacktestMethod make_pqr_method(PenaltyKind kind, const std::string& label,
                               int cv_folds, int n_lambda, bool shuffle_folds) {
  return {label, [kind, cv_folds, n_lambda,
                  shuffle_folds](const WindowView& w, QuantileLevel tau,
                                 std::uint64_t seed) {
            CvGrid grid = default_grid(w.train, tau, kind, n_lambda);
            grid.n_folds = cv_folds;
            grid.shuffle = shuffle_folds;
            grid.seed = seed;
            PenaltySpec spec = cross_validate(w.train, tau, kind, grid);
            QuantileModel model = fit_penalized(w.train, tau, spec);
            MethodOutput out;
            out.predicted = model.predict(w.x_next);
            out.model = std::move(model);
            return out;
          }};
}

BacktestMethod make_qrf_method(ForestVariant variant, int n_trees, int min_leaf,
                               int mtry_extra) {
  const std::string label = variant == ForestVariant::qrfm ? "qrfm" : "qrfatw";
  return {label, [variant, n_trees, min_leaf,
                  mtry_extra](const WindowView& w, QuantileLevel tau,
                              std::uint64_t seed) {
            ForestConfig cfg;
            cfg.n_trees = n_trees;
            cfg.min_leaf = min_leaf;
            cfg.mtry_extra = mtry_extra;
            cfg.tau = tau;
            cfg.seed = seed;
            Forest forest = fit_forest(w.train, cfg, variant);
            MethodOutput out;
            out.predicted = predict_quantile(forest, w.x_next, tau);
            return out;
          }};
}

BacktestMethod make_garch_method(int n_boot) {
  return {"garch", [n_boot](const WindowView& w, QuantileLevel tau,
                            std::uint64_t seed) {
            GarchFit fit = fit_garch(w.train.y);
            std::mt19937_64 rng = make_engine(seed, 1);
            MethodOutput out;
            out.predicted = forecast_quantile(
                fit, w.train.y[w.train.T() - 1],
                fit.sigma_path[fit.sigma_path.size() - 1], tau, n_boot, rng);
            return out;
          }};
}

}  // namespace gar
