#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gar/backtest.hpp"
#include "json.hpp"

namespace gar {

inline constexpr const char* kGarVersion = "0.1.0";

struct MethodConfig {
  std::string name;  // qpcr | l1 | scad | mcp | qrf-m | qrf-atw | garch | intercept
  std::string label;
  nlohmann::json params = nlohmann::json::object();
};

// Declarative run description; every field except the data path has a
// documented default.
struct RunConfig {
  std::string data_path;
  std::string target;
  double tau = 0.05;
  int window_length = 420;
  int n_forecasts = 0;          // 0: as many as the sample allows
  int first_forecast_index = -1;  // -1: end-aligned
  std::string standardize = "per-window";  // none | global | per-window
  std::uint64_t seed = 42;
  int jobs = 0;
  std::string out_dir = "out";
  std::vector<MethodConfig> methods;

  static RunConfig from_toml(const nlohmann::json& doc);
};

BacktestMethod build_method(const MethodConfig& method);

nlohmann::json model_to_json(const QuantileModel& model,
                             const std::vector<std::string>& column_names);

nlohmann::json manifest_json(const nlohmann::json& config_echo,
                             std::uint64_t seed, const std::string& command);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace gar
