#pragma once

// Flat key-value configuration files with one nesting level:
//
//     # comment
//     seed = 7
//     [problem]
//     form = ball            ->  key "problem.form"
//
// plus RFC-4180 CSV emission with 17-significant-digit floats (round-trip
// exact) and a JSON run manifest.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "math.hpp"

namespace phirisk {

struct run_config {
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) != 0; }

  std::string get_str(const std::string& key, const std::string& dflt) const {
    const auto it = kv.find(key);
    return it == kv.end() ? dflt : it->second;
  }
  std::string require_str(const std::string& key) const {
    const auto it = kv.find(key);
    if (it == kv.end()) throw param_error("config: missing required key '" + key + "'");
    return it->second;
  }
  double get_num(const std::string& key, double dflt) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
      throw param_error("config: key '" + key + "' is not a number: '" + it->second + "'");
    return v;
  }
  double require_num(const std::string& key) const {
    if (!has(key)) throw param_error("config: missing required key '" + key + "'");
    return get_num(key, 0.0);
  }
  long get_int(const std::string& key, long dflt) const {
    const double v = get_num(key, static_cast<double>(dflt));
    const long l = static_cast<long>(v);
    if (static_cast<double>(l) != v)
      throw param_error("config: key '" + key + "' is not an integer");
    return l;
  }
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& dflt) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str())
        throw param_error("config: key '" + key + "' has a non-numeric entry '" + tok + "'");
      out.push_back(v);
    }
    if (out.empty())
      throw param_error("config: key '" + key + "' is an empty list");
    return out;
  }
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace detail

inline run_config parse_config_text(const std::string& text) {
  run_config cfg;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw param_error("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw param_error("config line " + std::to_string(lineno) + ": empty section");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw param_error("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw param_error("config line " + std::to_string(lineno) + ": empty key");
    cfg.kv[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

inline run_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw param_error("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// --- CSV ---------------------------------------------------------------------

// 17 significant digits: enough to round-trip any double exactly
inline std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

class csv_writer {
 public:
  explicit csv_writer(std::vector<std::string> header)
      : ncols_(header.size()) {
    append_row_(std::move(header));
  }
  void add_row(const std::vector<std::string>& cells) {
    if (cells.size() != ncols_)
      throw param_error("csv: row width " + std::to_string(cells.size()) +
                        " != header width " + std::to_string(ncols_));
    append_row_(cells);
  }
  const std::string& text() const { return text_; }
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw param_error("csv: cannot open '" + path + "' for writing");
    out << text_;
  }

 private:
  void append_row_(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_field(cells[i]);
    }
    text_ += "\r\n";
  }
  std::size_t ncols_;
  std::string text_;
};

}  // namespace phirisk
