#pragma once

// Flat key/value configuration:
//
//   # comment
//   problem = "minquad"
//   n = 12
//   box.lower = -5
//
// Values may be quoted. Later assignments override earlier ones.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "types.hpp"

namespace zonsnc {

class Config {
 public:
  static Config parse(std::istream& is) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      cfg.set(key, line.substr(eq + 1));
    }
    return cfg;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static Config load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    return parse(is);
  }

  void set(const std::string& key, const std::string& raw) { values_[key] = unquote(trim(raw)); }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    // accept 5e6 style integers
    const double d = to_double(key, it->second);
    if (d < 0 || d != std::floor(d)) throw ConfigError(key + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(d);
  }

  /// A scalar (broadcast to n entries) or a comma-separated list of n entries.
  Vector get_vector(const std::string& key, Eigen::Index n, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return Vector::Constant(n, fallback);
    std::vector<double> parts;
    std::stringstream ss(it->second);
    std::string cell;
    while (std::getline(ss, cell, ',')) parts.push_back(to_double(key, trim(cell)));
    if (parts.size() == 1) return Vector::Constant(n, parts[0]);
    if (static_cast<Eigen::Index>(parts.size()) != n)
      throw ConfigError(key + ": expected 1 or " + std::to_string(n) + " values");
    return Eigen::Map<Vector>(parts.data(), n);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static std::string unquote(const std::string& s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
      return s.substr(1, s.size() - 2);
    return s;
  }

  static double to_double(const std::string& key, const std::string& text) {
    double d = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, d);
    if (ec != std::errc() || ptr != last) throw ConfigError(key + ": not a number: '" + text + "'");
    return d;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace zonsnc
