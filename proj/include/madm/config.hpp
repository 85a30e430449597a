#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace madm {

/// Flat experiment configuration: `section.key` -> value.
///
/// Files use `[section]` headers followed by `key = value` lines; `#` and `;`
/// start comments. Every key must be one of the known keys, so typos fail
/// loudly instead of silently falling back to a default.
class Config {
 public:
  // Every known key at its default value.
  Config();

  static Config preset(const std::string& name);
  static std::vector<std::string> preset_names();
  static Config from_file(const std::filesystem::path& path);

  void merge_file(const std::filesystem::path& path);
  void merge_text(const std::string& text, const std::string& origin = "<text>");
  void set(const std::string& key, const std::string& value);
  // "section.key=value"
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  // Round-trips through merge_text.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace madm
