#include "gar/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "gar/errors.hpp"

namespace gar {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedCsv("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

double parse_cell(const std::string& cell) {
  size_t a = cell.find_first_not_of(" \t");
  if (a == std::string::npos) return std::nan("");
  size_t b = cell.find_last_not_of(" \t");
  std::string body = cell.substr(a, b - a + 1);
  if (body.empty() || body == "NA" || body == "NaN" || body == ".")
    return std::nan("");
  char* end = nullptr;
  double v = std::strtod(body.c_str(), &end);
  if (end == body.c_str() || *end != '\0') return std::nan("");
  return v;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace gar
