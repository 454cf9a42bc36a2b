// Run configuration: "key = value" lines, optional [section] headers that
// prefix the following keys, '#' comments. Every key must be in the schema.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace panelfx::cli {

/// Validation failure tied to a config field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

const std::vector<KeySpec>& schema();

class RunConfig {
 public:
  RunConfig() = default;

  /// Throws ConfigError on syntax errors and unknown keys.
  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.contains(key); }

  std::string get(const std::string& key) const;
  std::optional<std::string> explicit_value(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
  std::size_t get_count(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  /// Relative paths resolve against the directory of the config file.
  std::filesystem::path get_path(const std::string& key) const;

  /// Every schema key with its effective value, plus explicit extras.
  std::vector<std::pair<std::string, std::string>> resolved() const;
  std::string resolved_text() const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

}  // namespace panelfx::cli
