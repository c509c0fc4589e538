#pragma once

#include <map>
#include <string>

#include "json.hpp"

namespace hopflab {

/// Flat key=value run configuration. Values from an optional config file,
/// overridden by command-line flags; unknown keys are rejected. Serializes
/// to sorted key=value lines and round-trips exactly.
class RunConfig {
 public:
  static const std::map<std::string, std::string>& allowed_keys();

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);
  std::string serialize() const;
  nlohmann::ordered_json to_json() const;

  /// file values first, then overrides win
  void merge_overrides(const RunConfig& overrides);

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace hopflab
