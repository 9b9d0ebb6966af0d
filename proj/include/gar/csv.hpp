#pragma once

#include <string>
#include <vector>

namespace gar {

// Minimal CSV helpers shared by the dataset loader and the CLI writers.
// Handles plain comma separation plus basic double-quoted fields; trims
// trailing carriage returns.
std::vector<std::string> split_csv_line(const std::string& line);

std::vector<std::vector<std::string>> read_csv(const std::string& path);

// NaN on empty or unparsable cells.
double parse_cell(const std::string& cell);

std::string format_full(double v);  // round-trippable double formatting

}  // namespace gar
