#include "gar/run_config.hpp"

#include <fstream>

namespace gar {

namespace {

template <typename T>
T value_or(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_toml(const nlohmann::json& doc) {
  RunConfig cfg;
  const nlohmann::json data = doc.value("data", nlohmann::json::object());
  cfg.data_path = value_or<std::string>(data, "path", "");
  cfg.target = value_or<std::string>(data, "target", "");
  cfg.standardize = value_or<std::string>(data, "standardize", "per-window");

  const nlohmann::json run = doc.value("run", nlohmann::json::object());
  cfg.tau = value_or<double>(run, "tau", 0.05);
  cfg.window_length = value_or<int>(run, "window_length", 420);
  cfg.n_forecasts = value_or<int>(run, "n_forecasts", 0);
  cfg.first_forecast_index = value_or<int>(run, "first_forecast_index", -1);
  cfg.seed = value_or<std::uint64_t>(run, "seed", 42);
  cfg.jobs = value_or<int>(run, "jobs", 0);
  cfg.out_dir = value_or<std::string>(run, "out_dir", "out");

  if (cfg.data_path.empty())
    throw Error(ErrorKind::usage, "config: data.path is required");

  if (doc.contains("methods")) {
    for (const auto& m : doc.at("methods")) {
      MethodConfig method;
      method.name = value_or<std::string>(m, "name", "");
      method.label = value_or<std::string>(m, "label", method.name);
      method.params = m;
      if (method.name.empty())
        throw Error(ErrorKind::usage, "config: method without a name");
      cfg.methods.push_back(std::move(method));
    }
  }
  if (cfg.methods.empty())
    cfg.methods.push_back({"qpcr", "qpcr", nlohmann::json::object()});
  return cfg;
}

BacktestMethod build_method(const MethodConfig& method) {
  const auto& params = method.params;
  BacktestMethod built;
  if (method.name == "qpcr") {
    built = make_qpcr_method();
  } else if (method.name == "l1" || method.name == "scad" || method.name == "mcp") {
    PenaltyKind kind = method.name == "l1"  ? PenaltyKind::l1
                       : method.name == "scad" ? PenaltyKind::scad
                                               : PenaltyKind::mcp;
    built = make_pqr_method(kind, method.name,
                            value_or<int>(params, "cv_folds", 5),
                            value_or<int>(params, "n_lambda", 50),
                            value_or<bool>(params, "shuffle_folds", false));
  } else if (method.name == "qrf-m" || method.name == "qrf-atw") {
    built = make_qrf_method(
        method.name == "qrf-m" ? ForestVariant::qrfm : ForestVariant::qrfatw,
        value_or<int>(params, "trees", 2000),
        value_or<int>(params, "min_leaf", 5),
        value_or<int>(params, "mtry_extra", 20));
  } else if (method.name == "garch") {
    built = make_garch_method(value_or<int>(params, "n_boot", 100000));
  } else if (method.name == "intercept") {
    built = make_intercept_method();
  } else {
    throw Error(ErrorKind::usage, "unknown method '" + method.name + "'");
  }
  built.label = method.label;
  return built;
}

nlohmann::json model_to_json(const QuantileModel& model,
                             const std::vector<std::string>& column_names) {
  nlohmann::json out;
  out["tau"] = model.tau;
  out["intercept"] = model.intercept;
  out["ebic"] = model.ebic_value;
  nlohmann::json beta = nlohmann::json::object();
  nlohmann::json active = nlohmann::json::array();
  for (int j : model.active_set) {
    const std::string name = j < static_cast<int>(column_names.size())
                                 ? column_names[j]
                                 : "col" + std::to_string(j);
    active.push_back(name);
    beta[name] = model.beta[j];
  }
  out["active"] = active;
  out["beta"] = beta;
  out["active_indices"] = model.active_set;
  return out;
}

nlohmann::json manifest_json(const nlohmann::json& config_echo,
                             std::uint64_t seed, const std::string& command) {
  nlohmann::json manifest;
  manifest["version"] = kGarVersion;
  manifest["command"] = command;
  manifest["seed"] = seed;
  manifest["config"] = config_echo;
  return manifest;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::data, "cannot write '" + path + "'");
  out << contents;
}

}  // namespace gar
