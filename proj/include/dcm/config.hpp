#pragma once

#include <map>
#include <string>
#include <vector>

#include "dcm/core.hpp"

namespace dcm {

/// Sectioned key=value configuration. Lines are `key = value` under `[section]`
/// headers; `#` starts a comment; duplicate keys within a section are an error.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  index_t integer(const std::string& section, const std::string& key) const;
  index_t integer_or(const std::string& section, const std::string& key,
                     index_t fallback) const;
  bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
  /// Whitespace-separated integer list (e.g. `orders = 1 2 3`).
  std::vector<int> integers_or(const std::string& section, const std::string& key,
                               const std::vector<int>& fallback) const;
  std::vector<double> numbers_or(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;

  /// Canonical text form (sorted sections and keys) for run manifests.
  std::string echo() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace dcm
