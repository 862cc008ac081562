#include "dcm/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dcm {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', "config line " + std::to_string(lineno) +
                                      ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      require(!section.empty(), "config line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    std::size_t eq = line.find('=');
    require(eq != std::string::npos,
            "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), "config line " + std::to_string(lineno) + ": empty key");
    auto [it, inserted] = cfg.sections_[section].emplace(key, value);
    require(inserted, "config line " + std::to_string(lineno) + ": duplicate key '" + key +
                          "' in section [" + section + "]");
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s != sections_.end()) {
    auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  throw Error("missing config key: [" + section + "] " + key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double Config::number(const std::string& section, const std::string& key) const {
  const std::string text = get(section, key);
  char* end = nullptr;
  double value = std::strtod(text.c_str(), &end);
  require(end && *end == '\0' && end != text.c_str(),
          "config key [" + section + "] " + key + " is not a number: " + text);
  return value;
}

double Config::number_or(const std::string& section, const std::string& key,
                         double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

index_t Config::integer(const std::string& section, const std::string& key) const {
  const std::string text = get(section, key);
  char* end = nullptr;
  long long value = std::strtoll(text.c_str(), &end, 10);
  require(end && *end == '\0' && end != text.c_str(),
          "config key [" + section + "] " + key + " is not an integer: " + text);
  return static_cast<index_t>(value);
}

index_t Config::integer_or(const std::string& section, const std::string& key,
                           index_t fallback) const {
  return has(section, key) ? integer(section, key) : fallback;
}

bool Config::flag_or(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string text = get(section, key);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error("config key [" + section + "] " + key + " is not a boolean: " + text);
}

std::vector<int> Config::integers_or(const std::string& section, const std::string& key,
                                     const std::vector<int>& fallback) const {
  if (!has(section, key)) return fallback;
  std::istringstream in(get(section, key));
  std::vector<int> values;
  int v;
  while (in >> v) values.push_back(v);
  require(in.eof(), "config key [" + section + "] " + key + " is not an integer list");
  require(!values.empty(), "config key [" + section + "] " + key + " is empty");
  return values;
}

std::vector<double> Config::numbers_or(const std::string& section, const std::string& key,
                                       const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::istringstream in(get(section, key));
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  require(in.eof(), "config key [" + section + "] " + key + " is not a number list");
  require(!values.empty(), "config key [" + section + "] " + key + " is empty");
  return values;
}

std::string Config::echo() const {
  std::ostringstream out;
  for (const auto& [name, entries] : sections_) {
    if (!name.empty()) out << '[' << name << "]\n";
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace dcm
