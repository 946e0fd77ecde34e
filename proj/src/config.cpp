#include "mcflab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mcflab/errors.hpp"

namespace mcflab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_text(buf.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": empty section name");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full))
      throw ConfigError(origin + ": duplicate key '" + full + "'");
    cfg.values_[full] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  return it->second;
}

std::string Config::require_string(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  consumed_.insert(key);
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  const char* s = it->second.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" +
                      it->second + "'");
  return v;
}

double Config::require_double(const std::string& key) {
  if (!has(key))
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  return get_double(key, 0.0);
}

long long Config::get_int(const std::string& key, long long fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  const char* s = it->second.c_str();
  char* end = nullptr;
  long long v = std::strtoll(s, &end, 10);
  if (end == s || *end != '\0')
    throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" +
                      it->second + "'");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_.insert(key);
  const std::string& v = it->second;
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: '" + v +
                    "'");
}

std::vector<double> Config::get_doubles(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end()) return {};
  consumed_.insert(key);
  std::vector<double> out;
  std::string token;
  std::istringstream in(it->second);
  while (std::getline(in, token, ',')) {
    std::istringstream tok(token);
    double v;
    while (tok >> v) out.push_back(v);
    if (!tok.eof()) {
      tok.clear();
      std::string leftover;
      tok >> leftover;
      if (!leftover.empty())
        throw ConfigError(origin_ + ": key '" + key +
                          "' has a non-numeric entry: '" + leftover + "'");
    }
  }
  return out;
}

std::vector<std::string> Config::keys_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (auto it = values_.lower_bound(prefix); it != values_.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    out.push_back(it->first);
  }
  return out;
}

void Config::reject_unconsumed() const {
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key))
      throw ConfigError(origin_ + ": unknown key '" + key + "'");
}

}  // namespace mcflab
