#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmflow/torus_grid.hpp"

namespace swarmflow {

/// Flat `section.key = value` configuration. Keys are kept sorted so that serialisation
/// and hashing do not depend on the order of the source lines.
class Config {
 public:
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, std::string value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value);
  void set(const std::string& key, int value);
  void set(const std::string& key, bool value);
  void erase(const std::string& key) { values_.erase(key); }

  /// Throw ConfigError naming the key (and its source line) on a missing or malformed value.
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  /// Comma-separated list of numbers, e.g. "0.5, 0".
  std::vector<double> get_list(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Source line of a key, 0 if it was set programmatically.
  int line_of(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  bool operator==(const Config& o) const { return values_ == o.values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;

  friend Config parse_config(std::string_view text);
};

/// Blank lines and lines starting with '#' are skipped; trailing "# ..." is a comment.
/// Throws ConfigError with the offending line and key.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);
std::string serialize(const Config& c);
/// 64-bit FNV-1a of serialize(c).
std::uint64_t config_hash(const Config& c);
std::string hex_hash(std::uint64_t h);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

}  // namespace swarmflow
