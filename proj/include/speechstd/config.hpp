#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace speechstd {

// Minimal TOML-like key/value file:
//
//   # comment
//   window_s = 5
//   [denoise]
//   fft_size = 1024
//   [endpoints]
//   asr = "http://127.0.0.1:8080"
//
// Keys inside a section are stored as "section.key". Values are strings,
// numbers or booleans; no arrays or inline tables.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);  // throws ConfigSyntax
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace speechstd
