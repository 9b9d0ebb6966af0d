// gar: growth-at-risk quantile forecasting toolkit command line.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "gar/backtest.hpp"
#include "gar/csv.hpp"
#include "gar/gar_decomp.hpp"
#include "gar/garch.hpp"
#include "gar/parallel.hpp"
#include "gar/qpcr.hpp"
#include "gar/rng.hpp"
#include "gar/run_config.hpp"
#include "gar/simlab.hpp"
#include "gar/toml_lite.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gar;

namespace {

void write_manifest(const std::string& primary_output, const json& config_echo,
                    std::uint64_t seed, const std::string& command) {
  const fs::path out(primary_output);
  fs::path path = out.parent_path() / (out.stem().string() + ".manifest.json");
  if (out.filename() == "manifest.json") path = out;
  write_text_file(path.string(), manifest_json(config_echo, seed, command).dump(2) + "\n");
}

PanelData load_panel(const std::string& path, const std::string& target,
                     bool standardize) {
  RawPanel raw = load_fredmd_csv(path);
  RawPanel transformed = apply_transforms(raw);
  return build_panel(transformed, target, standardize);
}

std::string quantile_csv_value(double v) {
  return std::isfinite(v) ? format_full(v) : "";
}

void cmd_data_inspect(const std::string& path) {
  RawPanel raw = load_fredmd_csv(path);
  std::map<int, int> codes;
  Eigen::Index missing = 0;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) ++codes[raw.transform_codes[j]];
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (Eigen::Index j = 0; j < raw.cols(); ++j)
      if (std::isnan(raw.values(i, j))) ++missing;
  std::cout << "rows: " << raw.rows() << "\n"
            << "columns: " << raw.cols() << "\n"
            << "span: " << raw.dates.front().to_string() << " .. "
            << raw.dates.back().to_string() << "\n"
            << "spacing_months: " << raw.spacing_months << "\n"
            << "missing_cells: " << missing << "\n";
  std::cout << "transform_codes:";
  for (const auto& [code, count] : codes)
    std::cout << " " << code << "x" << count;
  std::cout << "\n";
  std::cerr << manifest_json({{"file", path}}, 0, "data inspect").dump() << "\n";
}

void cmd_data_transform(const std::string& path, const std::string& out) {
  RawPanel raw = load_fredmd_csv(path);
  RawPanel transformed = apply_transforms(raw);
  // the written panel holds levels of the transformed series
  transformed.transform_codes.assign(transformed.cols(), 1);
  write_fredmd_csv(transformed, out);
  write_manifest(out, {{"file", path}, {"out", out}}, 0, "data transform");
}

struct FitCommon {
  std::string data;
  std::string target;
  std::string out = "model.json";
  double tau = 0.05;
  bool standardize = false;
  std::uint64_t seed = 42;
};

void emit_model(const FitCommon& common, const PanelData& panel,
                const QuantileModel& model, json extra,
                const std::string& command) {
  json doc = model_to_json(model, panel.column_names);
  doc["target"] = common.target;
  doc["data"] = common.data;
  for (auto& [key, value] : extra.items()) doc[key] = value;
  if (panel.x_latest.size() > 0) {
    doc["forecast_origin"] = panel.x_latest_date.to_string();
    doc["forecast"] = model.predict(panel.x_latest);
  }
  write_text_file(common.out, doc.dump(2) + "\n");
  write_manifest(common.out,
                 {{"data", common.data},
                  {"target", common.target},
                  {"tau", common.tau},
                  {"standardize", common.standardize}},
                 common.seed, command);
}

void cmd_fit_qpcr(const FitCommon& common) {
  PanelData panel = load_panel(common.data, common.target, common.standardize);
  QpcrConfig cfg = QpcrConfig::defaults(panel.T(), QuantileLevel{common.tau});
  auto [model, path] = fit_qpcr(panel, cfg);
  json extra;
  extra["method"] = "qpcr";
  extra["d_selected"] = path.d_selected;
  extra["ebic_curve"] = path.ebic_curve;
  extra["qpc_trace"] = path.qpc_trace;
  json order = json::array();
  for (int j : path.ordered_selected) order.push_back(panel.column_names[j]);
  extra["selection_order"] = order;
  emit_model(common, panel, model, extra, "fit qpcr");
}

void cmd_fit_pqr(const FitCommon& common, const std::string& penalty, int cv,
                 int n_lambda) {
  PanelData panel = load_panel(common.data, common.target, common.standardize);
  PenaltyKind kind = penalty == "l1"     ? PenaltyKind::l1
                     : penalty == "scad" ? PenaltyKind::scad
                                         : PenaltyKind::mcp;
  QuantileLevel tau{common.tau};
  CvGrid grid = default_grid(panel, tau, kind, n_lambda);
  grid.n_folds = cv;
  grid.seed = common.seed;
  PenaltySpec spec = cross_validate(panel, tau, kind, grid);
  QuantileModel model = fit_penalized(panel, tau, spec);
  json extra;
  extra["method"] = penalty;
  extra["lambda"] = spec.lambda;
  extra["a"] = spec.a;
  extra["cv_folds"] = cv;
  emit_model(common, panel, model, extra, "fit pqr");
}

void cmd_fit_qrf(const FitCommon& common, const std::string& variant, int trees,
                 int min_leaf, int mtry_extra) {
  PanelData panel = load_panel(common.data, common.target, common.standardize);
  ForestConfig cfg;
  cfg.n_trees = trees;
  cfg.min_leaf = min_leaf;
  cfg.mtry_extra = mtry_extra;
  cfg.tau = QuantileLevel{common.tau};
  cfg.seed = common.seed;
  Forest forest = fit_forest(
      panel, cfg, variant == "m" ? ForestVariant::qrfm : ForestVariant::qrfatw);
  json doc;
  doc["method"] = variant == "m" ? "qrfm" : "qrfatw";
  doc["tau"] = common.tau;
  doc["trees"] = trees;
  doc["min_leaf"] = min_leaf;
  doc["mtry_extra"] = mtry_extra;
  doc["target"] = common.target;
  if (panel.x_latest.size() > 0) {
    doc["forecast_origin"] = panel.x_latest_date.to_string();
    doc["forecast"] =
        predict_quantile(forest, panel.x_latest, QuantileLevel{common.tau});
  }
  write_text_file(common.out, doc.dump(2) + "\n");
  write_manifest(common.out, {{"data", common.data}, {"variant", variant}},
                 common.seed, "fit qrf");
}

void cmd_fit_garch(const FitCommon& common, int n_boot) {
  PanelData panel = load_panel(common.data, common.target, false);
  GarchFit fit = fit_garch(panel.y);
  std::mt19937_64 rng = make_engine(common.seed, 0);
  const double forecast = forecast_quantile(
      fit, panel.y[panel.T() - 1], fit.sigma_path[fit.sigma_path.size() - 1],
      QuantileLevel{common.tau}, n_boot, rng);
  json doc;
  doc["method"] = "garch";
  doc["tau"] = common.tau;
  doc["params"] = {{"phi0", fit.params.phi0},
                   {"phi1", fit.params.phi1},
                   {"omega", fit.params.omega},
                   {"alpha", fit.params.alpha},
                   {"gamma", fit.params.gamma}};
  doc["loglik"] = fit.loglik;
  doc["stationary_boundary"] = fit.stationary_boundary;
  doc["forecast"] = forecast;
  write_text_file(common.out, doc.dump(2) + "\n");
  write_manifest(common.out, {{"data", common.data}, {"n_boot", n_boot}},
                 common.seed, "fit garch");
}

SelectorFn make_selector(const std::string& method) {
  if (method == "qpcr") {
    return [](const Vector& y, const Matrix& x, QuantileLevel tau) {
      auto [model, path] =
          fit_qpcr(make_panel(y, x), QpcrConfig::defaults(y.size(), tau));
      return model.active_set;
    };
  }
  PenaltyKind kind;
  if (method == "l1") kind = PenaltyKind::l1;
  else if (method == "scad") kind = PenaltyKind::scad;
  else if (method == "mcp") kind = PenaltyKind::mcp;
  else throw Error(ErrorKind::usage, "unknown sim method '" + method + "'");
  return [kind](const Vector& y, const Matrix& x, QuantileLevel tau) {
    PanelData panel = make_panel(y, x);
    CvGrid grid = default_grid(panel, tau, kind);
    PenaltySpec spec = cross_validate(panel, tau, kind, grid);
    return fit_penalized(panel, tau, spec).active_set;
  };
}

void cmd_sim(const std::string& setup, int t_len, int p, int s,
             const std::string& method, int reps, double tau,
             std::uint64_t seed, const std::string& out,
             const std::string& emit_panel) {
  DgpSpec spec;
  spec.T = t_len;
  spec.p = p;
  spec.s = s;
  spec.seed = seed;
  if (setup == "fixed-sparse") spec.setup = DgpSetup::fixed_sparse;
  else if (setup == "time-varying-sparse") spec.setup = DgpSetup::time_varying_sparse;
  else if (setup == "dense") spec.setup = DgpSetup::dense;
  else throw Error(ErrorKind::usage, "unknown setup '" + setup + "'");

  if (!emit_panel.empty()) {
    std::mt19937_64 rng = make_engine(seed, 0);
    DgpDraw draw = generate(spec, rng);
    // FRED-MD layout: the aligned response becomes a level column shifted
    // one step ahead of the predictors
    RawPanel raw;
    raw.column_names.push_back("Y");
    for (int j = 0; j < p; ++j)
      raw.column_names.push_back("x" + std::to_string(j + 1));
    raw.transform_codes.assign(p + 1, 1);
    raw.group_labels.assign(p + 1, "");
    raw.values = Matrix::Constant(t_len + 1, p + 1, std::nan(""));
    for (int i = 0; i < t_len; ++i) {
      raw.values(i + 1, 0) = draw.y[i];
      for (int j = 0; j < p; ++j) raw.values(i, j + 1) = draw.x(i, j);
    }
    raw.dates.resize(t_len + 1);
    for (int i = 0; i <= t_len; ++i)
      raw.dates[i] = Date{1980, 1, 1}.plus_months(i);
    write_fredmd_csv(raw, emit_panel);
  }

  SimulationReport report =
      run_study(spec, method, make_selector(method), QuantileLevel{tau}, reps);

  std::ostringstream csv;
  csv << "setup,method,T,p,s,tau,reps,failures";
  for (int j = 0; j < s; ++j) csv << ",freq_x" << (j + 1);
  csv << ",avg_false\n";
  csv << setup << ',' << method << ',' << t_len << ',' << p << ',' << s << ','
      << format_full(tau) << ',' << report.n_reps << ',' << report.n_failures;
  for (double f : report.per_relevant_frequency) csv << ',' << format_full(f);
  csv << ',' << format_full(report.avg_false) << "\n";
  write_text_file(out, csv.str());
  write_manifest(out,
                 {{"setup", setup},
                  {"method", method},
                  {"T", t_len},
                  {"p", p},
                  {"s", s},
                  {"tau", tau},
                  {"reps", reps}},
                 seed, "sim");
}

void cmd_backtest(const std::string& config_path, std::string out,
                  int jobs_override) {
  json doc = parse_toml_file(config_path);
  RunConfig cfg = RunConfig::from_toml(doc);
  if (jobs_override > 0) cfg.jobs = jobs_override;
  if (cfg.jobs > 0) par::set_max_jobs(cfg.jobs);

  PanelData panel = load_panel(cfg.data_path, cfg.target,
                               cfg.standardize == "global");
  WindowStandardize mode = cfg.standardize == "per-window"
                               ? WindowStandardize::per_window
                               : WindowStandardize::none;

  RollingWindowPlan plan;
  plan.window_length = cfg.window_length;
  plan.n_forecasts = cfg.n_forecasts > 0
                         ? cfg.n_forecasts
                         : static_cast<int>(panel.T()) - cfg.window_length;
  plan.first_forecast_index = cfg.first_forecast_index >= 0
                                  ? cfg.first_forecast_index
                                  : static_cast<int>(panel.T()) - plan.n_forecasts;

  std::vector<BacktestMethod> methods;
  for (const auto& m : cfg.methods) methods.push_back(build_method(m));

  BacktestResult result = run_backtest(panel, plan, methods,
                                       QuantileLevel{cfg.tau}, mode, cfg.seed);

  fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);
  if (out.empty()) out = (out_dir / "forecasts.csv").string();

  std::ostringstream csv;
  csv << "window,date,method,tau,predicted,realized\n";
  for (const auto& rec : result.records)
    csv << rec.window_index << ',' << rec.date.to_string() << ',' << rec.method
        << ',' << format_full(rec.tau) << ',' << quantile_csv_value(rec.predicted)
        << ',' << quantile_csv_value(rec.realized) << "\n";
  write_text_file(out, csv.str());

  // per-method records for the summary tables
  std::map<std::string, std::vector<ForecastRecord>> by_method;
  for (const auto& rec : result.records) by_method[rec.method].push_back(rec);

  json mpe_doc;
  mpe_doc["tau"] = cfg.tau;
  mpe_doc["n_forecasts"] = plan.n_forecasts;
  json mpe_rows = json::array();
  for (const auto& method : methods) {
    json row;
    row["method"] = method.label;
    const auto it = by_method.find(method.label);
    row["mpe"] = it == by_method.end() || it->second.empty()
                     ? json()
                     : json(mpe(it->second));
    row["failures"] = result.failures.at(method.label);
    mpe_rows.push_back(row);
  }
  mpe_doc["rows"] = mpe_rows;
  write_text_file((out_dir / "mpe.json").string(), mpe_doc.dump(2) + "\n");

  // DM table in the shape of the forecasting-comparison table: first method
  // as the baseline against every other, plus the full pairwise matrix
  json dm_doc;
  dm_doc["baseline"] = methods.front().label;
  json versus = json::array();
  json matrix = json::array();
  for (size_t i = 0; i < methods.size(); ++i) {
    for (size_t j = 0; j < methods.size(); ++j) {
      if (i == j) continue;
      const auto& a = by_method[methods[i].label];
      const auto& b = by_method[methods[j].label];
      json cell;
      cell["a"] = methods[i].label;
      cell["b"] = methods[j].label;
      try {
        DmResult dm = diebold_mariano(a, b);
        cell["statistic"] = dm.statistic;
        cell["loss_diff_mean"] = dm.loss_diff_mean;
        cell["n"] = dm.n;
        cell["degenerate"] = dm.degenerate;
      } catch (const std::exception& e) {
        cell["error"] = e.what();
      }
      matrix.push_back(cell);
      if (i == 0) versus.push_back(cell);
    }
  }
  dm_doc["versus"] = versus;
  dm_doc["matrix"] = matrix;
  write_text_file((out_dir / "dm.json").string(), dm_doc.dump(2) + "\n");

  // per-window linear models for the decomposition step
  for (const auto& [label, records] : result.models) {
    json models_doc;
    models_doc["method"] = label;
    models_doc["tau"] = cfg.tau;
    models_doc["columns"] = result.column_names;
    json group_labels = json::array();
    for (const auto& g : panel.group_labels) group_labels.push_back(g);
    models_doc["group_labels"] = group_labels;
    json windows_json = json::array();
    for (const auto& rec : records) {
      json w;
      w["window"] = rec.window_index;
      w["date"] = rec.date.to_string();
      w["intercept"] = rec.model.intercept;
      json beta = json::object();
      for (int j : rec.model.active_set)
        beta[result.column_names[j]] = rec.model.beta[j];
      w["beta"] = beta;
      w["x_next"] = std::vector<double>(rec.x_next.data(),
                                        rec.x_next.data() + rec.x_next.size());
      windows_json.push_back(w);
    }
    models_doc["windows"] = windows_json;
    write_text_file((out_dir / ("models_" + label + ".json")).string(),
                    models_doc.dump(2) + "\n");
  }

  json echo = doc;
  echo["resolved_plan"] = {{"window_length", plan.window_length},
                           {"first_forecast_index", plan.first_forecast_index},
                           {"n_forecasts", plan.n_forecasts}};
  write_text_file((out_dir / "manifest.json").string(),
                  manifest_json(echo, cfg.seed, "backtest").dump(2) + "\n");
  std::cerr << "backtest: " << result.records.size() << " records, outputs in "
            << out_dir.string() << "\n";
}

std::vector<WindowModelRecord> read_models_json(const std::string& path,
                                                std::vector<std::string>& columns,
                                                std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::data, "cannot open '" + path + "'");
  json doc = json::parse(in);
  columns = doc.at("columns").get<std::vector<std::string>>();
  if (doc.contains("group_labels"))
    labels = doc.at("group_labels").get<std::vector<std::string>>();
  std::map<std::string, int> index_of;
  for (size_t j = 0; j < columns.size(); ++j)
    index_of[columns[j]] = static_cast<int>(j);

  std::vector<WindowModelRecord> records;
  for (const auto& w : doc.at("windows")) {
    WindowModelRecord rec;
    rec.window_index = w.at("window").get<int>();
    rec.date = parse_date(w.at("date").get<std::string>());
    rec.model.tau = doc.at("tau").get<double>();
    rec.model.intercept = w.at("intercept").get<double>();
    rec.model.beta = Vector::Zero(columns.size());
    for (const auto& [name, value] : w.at("beta").items()) {
      const auto it = index_of.find(name);
      if (it == index_of.end())
        throw Error(ErrorKind::data, "unknown coefficient column '" + name + "'");
      rec.model.beta[it->second] = value.get<double>();
      rec.model.active_set.push_back(it->second);
    }
    std::sort(rec.model.active_set.begin(), rec.model.active_set.end());
    const auto xn = w.at("x_next").get<std::vector<double>>();
    rec.x_next = Eigen::Map<const Vector>(xn.data(), xn.size());
    records.push_back(rec);
  }
  return records;
}

void cmd_decompose(const std::string& model_run, const std::string& groups_csv,
                   const std::string& out, const std::string& selection_out,
                   int min_consecutive) {
  std::vector<std::string> columns, labels;
  std::vector<WindowModelRecord> records =
      read_models_json(model_run, columns, labels);
  if (labels.size() != columns.size()) labels.assign(columns.size(), "");

  if (!groups_csv.empty()) {
    std::map<std::string, std::string> group_of;
    for (const auto& row : read_csv(groups_csv)) {
      if (row.size() < 2 || row[0] == "column" || row[0] == "name") continue;
      group_of[row[0]] = row[1];
    }
    for (size_t j = 0; j < columns.size(); ++j) {
      const auto it = group_of.find(columns[j]);
      if (it != group_of.end()) labels[j] = it->second;
    }
  }
  GroupPartition partition = GroupPartition::from_labels(labels);
  ContributionSeries series = decompose_series(records, partition);

  std::ostringstream csv;
  csv << "date";
  for (const auto& name : series.group_names) csv << ',' << name;
  csv << ",predicted\n";
  for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
    csv << series.dates[r].to_string();
    for (Eigen::Index g = 0; g < series.values.cols(); ++g)
      csv << ',' << format_full(series.values(r, g));
    csv << ',' << format_full(series.predicted[r]) << "\n";
  }
  write_text_file(out, csv.str());

  if (!selection_out.empty()) {
    // selection trace with the optional min-consecutive filter
    std::vector<std::vector<int>> active(records.size(),
                                         std::vector<int>(columns.size(), 0));
    for (size_t r = 0; r < records.size(); ++r)
      for (int j : records[r].model.active_set) active[r][j] = 1;
    std::vector<char> keep(columns.size(), min_consecutive <= 1);
    if (min_consecutive > 1) {
      for (size_t j = 0; j < columns.size(); ++j) {
        int run = 0;
        for (size_t r = 0; r < records.size(); ++r) {
          run = active[r][j] ? run + 1 : 0;
          if (run >= min_consecutive) keep[j] = 1;
        }
      }
    }
    std::ostringstream sel;
    sel << "date";
    for (size_t j = 0; j < columns.size(); ++j)
      if (keep[j]) sel << ',' << columns[j];
    sel << "\n";
    for (size_t r = 0; r < records.size(); ++r) {
      sel << records[r].date.to_string();
      for (size_t j = 0; j < columns.size(); ++j)
        if (keep[j]) sel << ',' << active[r][j];
      sel << "\n";
    }
    write_text_file(selection_out, sel.str());
  }
  write_manifest(out,
                 {{"model_run", model_run},
                  {"groups", groups_csv},
                  {"min_consecutive", min_consecutive}},
                 0, "decompose");
}

DatedSeries read_dated_series(const std::string& path, const std::string& column) {
  auto rows = read_csv(path);
  if (rows.empty()) throw Error(ErrorKind::data, "empty series file " + path);
  DatedSeries series;
  series.label = fs::path(path).stem().string();
  size_t col = 1;
  size_t start = 0;
  // optional header: first cell of row 0 not a date
  bool has_header = false;
  try {
    parse_date(rows[0][0]);
  } catch (const std::exception&) {
    has_header = true;
  }
  if (has_header) {
    start = 1;
    if (!column.empty()) {
      for (size_t j = 1; j < rows[0].size(); ++j)
        if (rows[0][j] == column) col = j;
    }
  }
  std::vector<double> values;
  for (size_t i = start; i < rows.size(); ++i) {
    if (rows[i].size() <= col) continue;
    const double v = parse_cell(rows[i][col]);
    if (std::isnan(v)) continue;
    series.dates.push_back(parse_date(rows[i][0]));
    values.push_back(v);
  }
  series.values = Eigen::Map<const Vector>(values.data(), values.size());
  return series;
}

void cmd_index(const std::string& contributions, const std::string& group,
               int smooth, bool standardize, const std::string& out,
               const std::vector<std::string>& corr_inputs,
               const std::string& corr_out) {
  if (!contributions.empty()) {
    DatedSeries series = read_dated_series(contributions, group);
    if (series.values.size() == 0)
      throw Error(ErrorKind::data, "group '" + group + "' not found or empty");
    SectorIndex index =
        build_index(series.dates, series.values, smooth, standardize);
    std::ostringstream csv;
    csv << "date,index\n";
    for (Eigen::Index i = 0; i < index.smoothed.size(); ++i)
      csv << index.dates[i].to_string() << ',' << format_full(index.smoothed[i])
          << "\n";
    write_text_file(out, csv.str());
    write_manifest(out,
                   {{"contributions", contributions},
                    {"group", group},
                    {"smooth", smooth},
                    {"standardize", standardize}},
                   0, "index");
  }
  if (!corr_inputs.empty()) {
    std::vector<DatedSeries> all;
    for (const auto& path : corr_inputs)
      all.push_back(read_dated_series(path, ""));
    CorrelationResult corr = correlation_matrix(all);
    std::ostringstream csv;
    csv << "series";
    for (const auto& label : corr.labels) csv << ',' << label;
    csv << "\n";
    const char* star_text[] = {"", "*", "**", "***"};
    for (size_t i = 0; i < corr.labels.size(); ++i) {
      csv << corr.labels[i];
      for (size_t j = 0; j < corr.labels.size(); ++j) {
        csv << ',';
        if (i == j) {
          csv << "1";
        } else {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.4f%s", corr.r(i, j),
                        star_text[corr.stars(i, j)]);
          csv << buf;
        }
      }
      csv << "\n";
    }
    write_text_file(corr_out, csv.str());
    write_manifest(corr_out, {{"inputs", corr_inputs}}, 0, "index corr");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"growth-at-risk quantile forecasting toolkit"};
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs", jobs, "parallel worker cap (0 = hardware)");

  // data
  auto* data = app.add_subcommand("data", "panel ingestion utilities");
  data->require_subcommand(1);
  std::string data_file, data_out = "transformed.csv";
  auto* inspect = data->add_subcommand("inspect", "summarize a FRED-MD style csv");
  inspect->add_option("file", data_file)->required();
  auto* transform = data->add_subcommand("transform", "apply transform codes");
  transform->add_option("file", data_file)->required();
  transform->add_option("--out", data_out);

  // fit
  auto* fit = app.add_subcommand("fit", "fit one model on a full panel");
  fit->require_subcommand(1);
  FitCommon common;
  std::string penalty = "l1", variant = "m";
  int cv = 5, n_lambda = 50, trees = 2000, min_leaf = 5, mtry_extra = 20;
  int n_boot = 100000;
  auto add_common = [&common](CLI::App* cmd) {
    cmd->add_option("--data", common.data)->required();
    cmd->add_option("--target", common.target)->required();
    cmd->add_option("--tau", common.tau);
    cmd->add_option("--out", common.out);
    cmd->add_flag("--standardize", common.standardize);
    cmd->add_option("--seed", common.seed);
  };
  auto* fq = fit->add_subcommand("qpcr", "quantile partial correlation regression");
  add_common(fq);
  auto* fp = fit->add_subcommand("pqr", "penalized quantile regression");
  add_common(fp);
  fp->add_option("--penalty", penalty)->check(CLI::IsMember({"l1", "scad", "mcp"}));
  fp->add_option("--cv", cv);
  fp->add_option("--n-lambda", n_lambda);
  auto* ff = fit->add_subcommand("qrf", "quantile random forest");
  add_common(ff);
  ff->add_option("--variant", variant)->check(CLI::IsMember({"m", "atw"}));
  ff->add_option("--trees", trees);
  ff->add_option("--min-leaf", min_leaf);
  ff->add_option("--mtry-extra", mtry_extra);
  auto* fg = fit->add_subcommand("garch", "AR(1)-GARCH(1,1) quantile forecaster");
  add_common(fg);
  fg->add_option("--n-boot", n_boot);

  // sim
  auto* sim = app.add_subcommand("sim", "Monte Carlo selection study");
  std::string setup = "fixed-sparse", sim_method = "qpcr",
              sim_out = "simreport.csv", emit_panel;
  int sim_t = 500, sim_p = 110, sim_s = 5, reps = 1000;
  double sim_tau = 0.05;
  std::uint64_t sim_seed = 42;
  sim->add_option("--setup", setup)
      ->check(CLI::IsMember({"fixed-sparse", "time-varying-sparse", "dense"}));
  sim->add_option("--T", sim_t);
  sim->add_option("--p", sim_p);
  sim->add_option("--s", sim_s);
  sim->add_option("--method", sim_method)
      ->check(CLI::IsMember({"qpcr", "l1", "scad", "mcp"}));
  sim->add_option("--reps", reps);
  sim->add_option("--tau", sim_tau);
  sim->add_option("--seed", sim_seed);
  sim->add_option("--out", sim_out);
  sim->add_option("--emit-panel", emit_panel,
                  "also write one replication as a FRED-MD style csv");

  // backtest
  auto* backtest = app.add_subcommand("backtest", "rolling out-of-sample study");
  std::string config_path, backtest_out;
  backtest->add_option("--config", config_path)->required();
  backtest->add_option("--out", backtest_out, "forecasts csv path");

  // decompose
  auto* decompose = app.add_subcommand("decompose", "group contribution series");
  std::string model_run, groups_csv, dec_out = "contributions.csv", selection_out;
  int min_consecutive = 0;
  decompose->add_option("--model-run", model_run)->required();
  decompose->add_option("--groups", groups_csv);
  decompose->add_option("--out", dec_out);
  decompose->add_option("--selection-out", selection_out);
  decompose->add_option("--min-consecutive", min_consecutive);

  // index
  auto* index = app.add_subcommand("index", "sector index and correlations");
  std::string contributions, group, index_out = "index.csv",
              corr_out = "correlations.csv";
  int smooth = 3;
  bool standardize_index = false;
  std::vector<std::string> corr_inputs;
  index->add_option("--contributions", contributions);
  index->add_option("--group", group);
  index->add_option("--smooth", smooth);
  index->add_flag("--standardize", standardize_index);
  index->add_option("--out", index_out);
  index->add_option("--corr", corr_inputs, "dated series csvs to correlate");
  index->add_option("--corr-out", corr_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 2;
  }

  try {
    if (jobs > 0) par::set_max_jobs(jobs);
    if (inspect->parsed()) cmd_data_inspect(data_file);
    else if (transform->parsed()) cmd_data_transform(data_file, data_out);
    else if (fq->parsed()) cmd_fit_qpcr(common);
    else if (fp->parsed()) cmd_fit_pqr(common, penalty, cv, n_lambda);
    else if (ff->parsed()) cmd_fit_qrf(common, variant, trees, min_leaf, mtry_extra);
    else if (fg->parsed()) cmd_fit_garch(common, n_boot);
    else if (sim->parsed())
      cmd_sim(setup, sim_t, sim_p, sim_s, sim_method, reps, sim_tau, sim_seed,
              sim_out, emit_panel);
    else if (backtest->parsed()) cmd_backtest(config_path, backtest_out, jobs);
    else if (decompose->parsed())
      cmd_decompose(model_run, groups_csv, dec_out, selection_out, min_consecutive);
    else if (index->parsed())
      cmd_index(contributions, group, smooth, standardize_index, index_out,
                corr_inputs, corr_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
