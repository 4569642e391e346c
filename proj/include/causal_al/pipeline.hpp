#pragma once

#include "causal_al/dataio.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace causal_al {

/// Key-value pipeline settings. Every key has a documented default (see
/// `default_config_text()`); unknown keys and out-of-range values are config
/// errors.
class PipelineConfig {
 public:
  PipelineConfig();
  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig parse(std::string_view text);

  /// `key=value`; the key must be known.
  void set(std::string_view assignment);
  void set(const std::string& key, std::string value);
  void validate() const;

  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;
  bool is_set(std::string_view key) const;  // non-empty value

  std::filesystem::path out_dir() const { return get("out_dir"); }
  std::uint64_t seed() const { return get_u64("seed"); }
  /// `<name>_seed` when given, otherwise derived from the master seed.
  std::uint64_t stage_seed(std::string_view name) const;
  Schema schema() const;

  const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

std::string default_config_text();
/// Same layout as the default text, with the values of `config`.
std::string config_text(const PipelineConfig& config);

/// Stage names accepted by run_stage, in pipeline order (synth and graph-dist excluded).
const std::vector<std::string>& pipeline_stages();

/// Runs one stage and writes its artifacts and manifest under out_dir.
/// `jobs` bounds worker threads and never changes results.
void run_stage(std::string_view stage, const PipelineConfig& config, std::size_t jobs);

std::uint64_t fnv1a_file(const std::filesystem::path& path);

/// Exit code and stderr prefix for an exception escaping a stage.
struct Failure {
  int exit_code;
  std::string line;
};
Failure describe_failure(const std::exception& e);

}  // namespace causal_al
