#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace degensys {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration with `[section]` headers. Keys are
/// addressed as "section.key". Blank lines and lines starting with '#' are
/// ignored. Every diagnostic names the offending line and key.
class Config {
public:
  static Config parse(std::istream& is, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      if (t.front() == '[') {
        if (t.back() != ']' || t.size() < 3)
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header '" +
                            t + "'");
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected 'key = value', got '" + t + "'");
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      const std::string full = section.empty() ? key : section + "." + key;
      if (cfg.values_.count(full))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
      cfg.values_[full] = value;
      cfg.lines_[full] = lineno;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    return parse(is, path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback = "") const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(where(key) + ": key '" + key + "' is not a number: '" + it->second + "'");
    }
  }

  int get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(where(key) + ": key '" + key + "' is not an integer: '" + it->second + "'");
    }
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (ss >> tok) {
      try {
        out.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError(where(key) + ": key '" + key + "' has a non-integer entry '" + tok + "'");
      }
    }
    if (out.empty()) throw ConfigError(where(key) + ": key '" + key + "' lists no values");
    return out;
  }

  /// All keys, for rejecting unknown entries.
  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

  std::string where(const std::string& key) const {
    const auto it = lines_.find(key);
    return origin_ + (it == lines_.end() ? "" : ":" + std::to_string(it->second));
  }

private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  }

  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

}  // namespace degensys
