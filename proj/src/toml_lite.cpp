#include "gar/toml_lite.hpp"

#include <fstream>
#include <sstream>

#include "gar/errors.hpp"

namespace gar {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// strip a trailing comment that is not inside a string literal
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::vector<std::string> split_dotted(const std::string& name) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : name) {
    if (c == '.') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

nlohmann::json parse_scalar(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw Error(ErrorKind::usage, "toml: empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      throw Error(ErrorKind::usage, "toml: unterminated string " + s);
    std::string out;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        ++i;
        out += s[i];
      } else {
        out += s[i];
      }
    }
    return out;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw Error(ErrorKind::usage, "toml: cannot parse value '" + s + "'");
  if (s.find_first_of(".eE") == std::string::npos &&
      v == static_cast<double>(static_cast<long long>(v)))
    return static_cast<long long>(v);
  return v;
}

nlohmann::json parse_value(const std::string& raw) {
  const std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw Error(ErrorKind::usage, "toml: unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    std::string body = s.substr(1, s.size() - 2);
    std::string cur;
    bool quoted = false;
    for (char c : body) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        if (!trim(cur).empty()) arr.push_back(parse_scalar(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) arr.push_back(parse_scalar(cur));
    return arr;
  }
  return parse_scalar(s);
}

nlohmann::json* descend(nlohmann::json& root, const std::vector<std::string>& path) {
  nlohmann::json* at = &root;
  for (const auto& key : path) {
    if (!at->is_object()) throw Error(ErrorKind::usage, "toml: bad table path");
    at = &(*at)[key];
    if (at->is_null()) *at = nlohmann::json::object();
    if (at->is_array()) at = &at->back();
  }
  return at;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* current = &root;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;

    if (body.size() >= 4 && body.substr(0, 2) == "[[" &&
        body.substr(body.size() - 2) == "]]") {
      const auto path = split_dotted(body.substr(2, body.size() - 4));
      nlohmann::json* parent = &root;
      for (size_t i = 0; i + 1 < path.size(); ++i)
        parent = descend(*parent, {path[i]});
      nlohmann::json& arr = (*parent)[path.back()];
      if (arr.is_null()) arr = nlohmann::json::array();
      if (!arr.is_array())
        throw Error(ErrorKind::usage, "toml: '" + path.back() + "' is not an array");
      arr.push_back(nlohmann::json::object());
      current = &arr.back();
      continue;
    }
    if (body.front() == '[' && body.back() == ']') {
      current = descend(root, split_dotted(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::usage,
                  "toml: line " + std::to_string(line_no) + " has no '='");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty())
      throw Error(ErrorKind::usage, "toml: empty key at line " + std::to_string(line_no));
    (*current)[key] = parse_value(body.substr(eq + 1));
  }
  return root;
}

nlohmann::json parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::data, "cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_toml(buffer.str());
}

}  // namespace gar
