#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace morphmt {

/// Flat `key = value` settings. Keys carry a section prefix (`decoder.beam`).
/// Lines starting with '#' and blank lines are ignored.
class Config {
 public:
  Config() = default;

  /// Built-in defaults for every known key.
  static Config defaults();
  static Config parse(std::string_view text, const std::string& origin = "<config>");
  /// Parses a file on top of the defaults; relative paths resolve against its directory.
  static Config load(const std::string& path);

  static bool known_key(std::string_view key);
  static const std::vector<std::string>& known_keys();

  /// Throws Error on unknown keys.
  void set(const std::string& key, const std::string& value);
  /// `key=value`.
  void apply_override(std::string_view assignment);
  void merge(const Config& other);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  /// Resolves against base_dir() unless absolute.
  std::string get_path(const std::string& key) const;

  const std::string& base_dir() const { return base_dir_; }
  void set_base_dir(std::string dir) { base_dir_ = std::move(dir); }

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Sorted `key = value` lines.
  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
  std::string base_dir_ = ".";
};

}  // namespace morphmt
