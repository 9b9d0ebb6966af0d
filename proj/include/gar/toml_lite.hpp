#pragma once

#include <string>

#include "json.hpp"

namespace gar {

// Minimal TOML subset sufficient for run configs: [table] and [[array of
// tables]] headers (dotted names allowed), key = value pairs with strings,
// numbers, booleans and flat arrays, # comments. Parsed into JSON.
nlohmann::json parse_toml(const std::string& text);
nlohmann::json parse_toml_file(const std::string& path);

}  // namespace gar
