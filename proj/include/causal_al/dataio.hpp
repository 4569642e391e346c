#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace causal_al {

/// Shortest text form that round-trips a double (17 significant digits max).
std::string format_double(double value);

/// Splits one CSV line; double-quoted fields may contain commas.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads `key = value` lines; `#` starts a comment. Later keys override earlier.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Comma-separated list with surrounding whitespace removed.
std::vector<std::string> split_list(std::string_view text);

std::string trim(std::string_view text);

/// Dense numeric table with named columns and opaque row labels.
///
/// `target_names` is a subset of `feature_names`: the target columns live in
/// the same matrix as the descriptors.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(std::vector<std::string> row_ids, std::vector<std::string> feature_names,
               Eigen::MatrixXd values, std::vector<std::string> target_names = {});

  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& target_names() const noexcept { return target_names_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  std::size_t rows() const noexcept { return row_ids_.size(); }
  std::size_t cols() const noexcept { return feature_names_.size(); }

  bool has_column(std::string_view name) const;
  std::size_t column_index(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;
  bool is_target(std::string_view name) const;

  /// Non-target columns in table order.
  std::vector<std::string> descriptor_names() const;

  std::optional<std::size_t> find_row(std::string_view id) const;

  FeatureTable select_rows(std::span<const std::size_t> rows) const;
  FeatureTable select_columns(std::span<const std::string> names) const;

  /// Same columns, new values; used by transforms.
  FeatureTable with_values(Eigen::MatrixXd values) const;
  FeatureTable with_row_ids(std::vector<std::string> ids) const;

  /// Row-wise concatenation; column sets must agree exactly.
  static FeatureTable concat(std::span<const FeatureTable> parts);

 private:
  std::vector<std::string> row_ids_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> target_names_;
  Eigen::MatrixXd values_;
  std::map<std::string, std::size_t, std::less<>> column_lookup_;
  std::map<std::string, std::size_t, std::less<>> row_lookup_;
};

/// Column roles for a features file.
struct Schema {
  std::string id_column = "id";
  std::vector<std::string> target_columns;
  std::size_t fingerprint_width = 2048;

  static Schema from_key_values(const std::map<std::string, std::string>& kv);
  static Schema load(const std::filesystem::path& path);
  std::string to_text() const;
};

struct LoadReport {
  std::size_t rows_loaded = 0;
  std::size_t rows_dropped = 0;

  std::string to_text() const;
};

struct LoadedTable {
  FeatureTable table;
  LoadReport report;
};

LoadedTable load_feature_table(const std::filesystem::path& path, const Schema& schema);
void save_feature_table(const FeatureTable& table, const std::filesystem::path& path,
                        std::string_view id_column = "id");

/// Fixed-width bit string; bit 0 is the most significant bit of the first hex digit.
class Bitvector {
 public:
  Bitvector() = default;
  explicit Bitvector(std::size_t width);

  static Bitvector from_hex(std::string_view hex, std::size_t width);
  /// Bits given as '0'/'1' characters, bit 0 first.
  static Bitvector from_bits(std::string_view bits);

  std::string to_hex() const;
  std::size_t width() const noexcept { return width_; }
  bool test(std::size_t bit) const;
  void set(std::size_t bit, bool on = true);
  std::size_t count() const;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const Bitvector&, const Bitvector&) = default;

 private:
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

struct FingerprintTable {
  std::vector<std::string> row_ids;
  std::vector<Bitvector> bits;
  std::size_t width = 2048;

  std::optional<std::size_t> find_row(std::string_view id) const;
  /// 0/1 real matrix, rows in table order.
  Eigen::MatrixXd to_matrix() const;
};

FingerprintTable load_fingerprints(const std::filesystem::path& path, std::size_t width);
void save_fingerprints(const FingerprintTable& table, const std::filesystem::path& path);

/// Throws unless every fingerprint id is a row of `table`.
void check_fingerprints_align(const FingerprintTable& fps, const FeatureTable& table);

/// Per-column z-scoring with statistics frozen at fit time.
struct Normalizer {
  std::vector<std::string> columns;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

/// Sample standard deviation (n-1). Zero variance raises DegenerateFeature.
Normalizer fit_normalizer(const FeatureTable& table, std::span<const std::string> columns);
/// Only the fitted columns are transformed; the rest pass through.
FeatureTable apply_normalizer(const Normalizer& normalizer, const FeatureTable& table);
FeatureTable invert_normalizer(const Normalizer& normalizer, const FeatureTable& table);

struct TrainTestSplit {
  FeatureTable train;
  FeatureTable test;
};

inline constexpr double kDefaultTrainFraction = 0.8;
inline constexpr std::uint64_t kDefaultSplitSeed = 20240401;

/// `train_fraction` of the rows (rounded) go to train, the rest to test. Both
/// halves keep the original row order.
TrainTestSplit split_rows(const FeatureTable& table, double train_fraction, std::uint64_t seed);

}  // namespace causal_al
