#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace mcflab {

// Flat `key = value` config with [section] headers; keys are stored as
// "section.key" ("" section for the preamble). Blank lines and #-comments
// ignored. Every key must be consumed by the run driver; leftovers are
// rejected by name (ConfigError).
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  double require_double(const std::string& key);
  long long get_int(const std::string& key, long long fallback);
  bool get_bool(const std::string& key, bool fallback);
  // Comma/space separated list of doubles.
  std::vector<double> get_doubles(const std::string& key);

  // Keys sharing a section prefix ("probe." -> probe.1, probe.2, ...).
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  // ConfigError naming the first never-consumed key, if any.
  void reject_unconsumed() const;

  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
  std::string origin_;
};

}  // namespace mcflab
