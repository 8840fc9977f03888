#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace readcx {

/// Flat key-value experiment configuration.
///
///   line    := blank | "#" comment | key "=" value
///   key     := [A-Za-z0-9_.-]+   (per-language inputs use "<name>.<lang>")
///
/// Whitespace around keys and values is ignored; a repeated key is an error.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::istream& in, std::filesystem::path base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);

  const std::string& text() const noexcept { return text_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  /// Required value; throws a Config error naming the key when absent.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Required path, resolved against the config file's directory.
  std::filesystem::path get_path(const std::string& key) const;
  std::optional<std::filesystem::path> find_path(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  /// Overrides (or adds) a value, e.g. from the command line.
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
  std::string text_;
};

struct ExperimentResult {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // bundle-relative, sorted
};

/// Runs one pipeline (svr | head | probe | scramble-eval | baseline) and writes
/// its bundle to `output_dir`. Outputs are staged in "<output_dir>.partial"
/// and moved into place only on success.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

inline constexpr const char* kVersion = "readcx 0.1.0";

}  // namespace readcx
