#include "causal_al/dataio.hpp"

#include "causal_al/error.hpp"
#include "causal_al/rng.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace causal_al {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Missing-value spellings that count as non-finite rather than malformed.
bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == "N/A" || s == "null";
}

std::optional<double> parse_number(std::string_view s) {
  if (is_missing_token(s)) return std::numeric_limits<double>::quiet_NaN();
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  for (auto& item : split_csv_line(text)) {
    if (!item.empty()) out.push_back(std::move(item));
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::bad_format, "line " + std::to_string(line_no) + ": expected key = value");
    }
    kv[trim(std::string_view(stripped).substr(0, eq))] = trim(std::string_view(stripped).substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str());
}

// ---------------------------------------------------------------------------
// FeatureTable

FeatureTable::FeatureTable(std::vector<std::string> row_ids, std::vector<std::string> feature_names,
                           Eigen::MatrixXd values, std::vector<std::string> target_names)
    : row_ids_(std::move(row_ids)),
      feature_names_(std::move(feature_names)),
      target_names_(std::move(target_names)),
      values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != row_ids_.size() ||
      static_cast<std::size_t>(values_.cols()) != feature_names_.size()) {
    throw Error(ErrorKind::column_mismatch, "value matrix shape does not match ids/names");
  }
  for (std::size_t j = 0; j < feature_names_.size(); ++j) {
    if (!column_lookup_.emplace(feature_names_[j], j).second) {
      throw Error(ErrorKind::column_mismatch, "duplicate column " + feature_names_[j]);
    }
  }
  for (const auto& t : target_names_) {
    if (!column_lookup_.contains(t)) throw Error(ErrorKind::missing_column, "target " + t);
  }
  for (std::size_t i = 0; i < row_ids_.size(); ++i) {
    if (!row_lookup_.emplace(row_ids_[i], i).second) throw Error(ErrorKind::duplicate_row_id, row_ids_[i]);
  }
}

bool FeatureTable::has_column(std::string_view name) const { return column_lookup_.find(name) != column_lookup_.end(); }

std::size_t FeatureTable::column_index(std::string_view name) const {
  const auto it = column_lookup_.find(name);
  if (it == column_lookup_.end()) throw Error(ErrorKind::missing_column, std::string(name));
  return it->second;
}

Eigen::VectorXd FeatureTable::column(std::string_view name) const { return values_.col(column_index(name)); }

bool FeatureTable::is_target(std::string_view name) const {
  return std::find(target_names_.begin(), target_names_.end(), name) != target_names_.end();
}

std::vector<std::string> FeatureTable::descriptor_names() const {
  std::vector<std::string> out;
  for (const auto& n : feature_names_) {
    if (!is_target(n)) out.push_back(n);
  }
  return out;
}

std::optional<std::size_t> FeatureTable::find_row(std::string_view id) const {
  const auto it = row_lookup_.find(id);
  if (it == row_lookup_.end()) return std::nullopt;
  return it->second;
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  Eigen::MatrixXd vals(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= row_ids_.size()) throw Error(ErrorKind::out_of_range, "row index");
    ids.push_back(row_ids_[rows[i]]);
    vals.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(rows[i]));
  }
  return FeatureTable(std::move(ids), feature_names_, std::move(vals), target_names_);
}

FeatureTable FeatureTable::select_columns(std::span<const std::string> names) const {
  Eigen::MatrixXd vals(values_.rows(), static_cast<Eigen::Index>(names.size()));
  std::vector<std::string> targets;
  for (std::size_t j = 0; j < names.size(); ++j) {
    vals.col(static_cast<Eigen::Index>(j)) = values_.col(column_index(names[j]));
    if (is_target(names[j])) targets.push_back(names[j]);
  }
  return FeatureTable(row_ids_, {names.begin(), names.end()}, std::move(vals), std::move(targets));
}

FeatureTable FeatureTable::with_values(Eigen::MatrixXd values) const {
  return FeatureTable(row_ids_, feature_names_, std::move(values), target_names_);
}

FeatureTable FeatureTable::with_row_ids(std::vector<std::string> ids) const {
  return FeatureTable(std::move(ids), feature_names_, values_, target_names_);
}

FeatureTable FeatureTable::concat(std::span<const FeatureTable> parts) {
  if (parts.empty()) return {};
  const auto& names = parts.front().feature_names();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.feature_names() != names) throw Error(ErrorKind::column_mismatch, "concat over different columns");
    total += p.values().rows();
  }
  Eigen::MatrixXd vals(total, static_cast<Eigen::Index>(names.size()));
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(total));
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    vals.middleRows(at, p.values().rows()) = p.values();
    at += p.values().rows();
    ids.insert(ids.end(), p.row_ids().begin(), p.row_ids().end());
  }
  return FeatureTable(std::move(ids), names, std::move(vals), parts.front().target_names());
}

// ---------------------------------------------------------------------------
// Schema / loading

Schema Schema::from_key_values(const std::map<std::string, std::string>& kv) {
  Schema schema;
  if (auto it = kv.find("id_column"); it != kv.end()) schema.id_column = it->second;
  if (auto it = kv.find("target_columns"); it != kv.end()) schema.target_columns = split_list(it->second);
  if (auto it = kv.find("fingerprint_width"); it != kv.end()) {
    const auto& v = it->second;
    std::size_t width = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), width);
    if (ec != std::errc() || ptr != v.data() + v.size() || width == 0) {
      throw Error(ErrorKind::invalid_argument, "fingerprint_width must be a positive integer");
    }
    schema.fingerprint_width = width;
  }
  return schema;
}

Schema Schema::load(const std::filesystem::path& path) { return from_key_values(read_key_values(path)); }

std::string Schema::to_text() const {
  std::string targets;
  for (std::size_t i = 0; i < target_columns.size(); ++i) {
    if (i) targets += ",";
    targets += target_columns[i];
  }
  return "id_column = " + id_column + "\ntarget_columns = " + targets +
         "\nfingerprint_width = " + std::to_string(fingerprint_width) + "\n";
}

std::string LoadReport::to_text() const {
  return "rows_loaded = " + std::to_string(rows_loaded) + "\nrows_dropped = " + std::to_string(rows_dropped) + "\n";
}

LoadedTable load_feature_table(const std::filesystem::path& path, const Schema& schema) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::bad_format, path.string() + ": missing header");
  strip_cr(line);
  const auto header = split_csv_line(line);

  const auto id_it = std::find(header.begin(), header.end(), schema.id_column);
  if (id_it == header.end()) throw Error(ErrorKind::missing_column, "id column " + schema.id_column);
  const auto id_pos = static_cast<std::size_t>(id_it - header.begin());
  for (const auto& t : schema.target_columns) {
    if (std::find(header.begin(), header.end(), t) == header.end()) {
      throw Error(ErrorKind::missing_column, "target column " + t);
    }
  }

  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != id_pos) names.push_back(header[j]);
  }

  std::vector<std::string> ids;
  std::vector<double> flat;
  std::set<std::string> seen;
  LoadReport report;
  std::size_t line_no = 1;
  std::vector<double> row(names.size());
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::bad_format, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    const std::string& id = fields[id_pos];
    if (!seen.insert(id).second) throw Error(ErrorKind::duplicate_row_id, id);

    bool finite = true;
    for (std::size_t j = 0, c = 0; j < fields.size(); ++j) {
      if (j == id_pos) continue;
      const auto v = parse_number(fields[j]);
      if (!v) {
        throw Error(ErrorKind::bad_format,
                    path.string() + ":" + std::to_string(line_no) + ": not a number: '" + fields[j] + "'");
      }
      finite = finite && std::isfinite(*v);
      row[c++] = *v;
    }
    if (!finite) {
      ++report.rows_dropped;
      continue;
    }
    ids.push_back(id);
    flat.insert(flat.end(), row.begin(), row.end());
  }
  if (ids.empty()) throw Error(ErrorKind::empty_table, path.string() + ": no rows survived validation");
  report.rows_loaded = ids.size();

  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), n, d);
  return {FeatureTable(std::move(ids), std::move(names), std::move(values), schema.target_columns), report};
}

void save_feature_table(const FeatureTable& table, const std::filesystem::path& path, std::string_view id_column) {
  auto out = open_output(path);
  out << id_column;
  for (const auto& n : table.feature_names()) out << ',' << n;
  out << '\n';
  const auto& v = table.values();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out << table.row_ids()[i];
    for (Eigen::Index j = 0; j < v.cols(); ++j) out << ',' << format_double(v(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Fingerprints

Bitvector::Bitvector(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

Bitvector Bitvector::from_hex(std::string_view hex, std::size_t width) {
  if (hex.size() * 4 != ((width + 3) / 4) * 4) {
    throw Error(ErrorKind::width_mismatch, "hex string of length " + std::to_string(hex.size()) +
                                               " for width " + std::to_string(width));
  }
  Bitvector bv(width);
  for (std::size_t i = 0; i < hex.size(); ++i) {
    const int nibble = hex_value(hex[i]);
    if (nibble < 0) throw Error(ErrorKind::bad_format, "bad hex digit in fingerprint");
    for (int b = 0; b < 4; ++b) {
      if (nibble & (8 >> b)) {
        const std::size_t bit = 4 * i + static_cast<std::size_t>(b);
        if (bit >= width) throw Error(ErrorKind::width_mismatch, "bit set beyond fingerprint width");
        bv.set(bit);
      }
    }
  }
  return bv;
}

Bitvector Bitvector::from_bits(std::string_view bits) {
  Bitvector bv(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') bv.set(i);
  }
  return bv;
}

std::string Bitvector::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string hex((width_ + 3) / 4, '0');
  for (std::size_t i = 0; i < hex.size(); ++i) {
    int nibble = 0;
    for (int b = 0; b < 4; ++b) {
      const std::size_t bit = 4 * i + static_cast<std::size_t>(b);
      if (bit < width_ && test(bit)) nibble |= 8 >> b;
    }
    hex[i] = kDigits[nibble];
  }
  return hex;
}

bool Bitvector::test(std::size_t bit) const { return (words_[bit / 64] >> (bit % 64)) & 1U; }

void Bitvector::set(std::size_t bit, bool on) {
  if (bit >= width_) throw Error(ErrorKind::out_of_range, "bit index");
  const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
  if (on) {
    words_[bit / 64] |= mask;
  } else {
    words_[bit / 64] &= ~mask;
  }
}

std::size_t Bitvector::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::optional<std::size_t> FingerprintTable::find_row(std::string_view id) const {
  const auto it = std::find(row_ids.begin(), row_ids.end(), id);
  if (it == row_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - row_ids.begin());
}

Eigen::MatrixXd FingerprintTable::to_matrix() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(bits.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    for (std::size_t b = 0; b < width; ++b) {
      if (bits[i].test(b)) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = 1.0;
    }
  }
  return m;
}

FingerprintTable load_fingerprints(const std::filesystem::path& path, std::size_t width) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::bad_format, path.string() + ": missing header");
  strip_cr(line);
  const auto header = split_csv_line(line);
  if (header.size() != 2 || header[1] != "fp_hex") {
    throw Error(ErrorKind::bad_format, path.string() + ": expected header id,fp_hex");
  }
  FingerprintTable table;
  table.width = width;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) throw Error(ErrorKind::bad_format, path.string() + ": expected 2 fields");
    if (!seen.insert(fields[0]).second) throw Error(ErrorKind::duplicate_row_id, fields[0]);
    table.row_ids.push_back(fields[0]);
    table.bits.push_back(Bitvector::from_hex(fields[1], width));
  }
  return table;
}

void save_fingerprints(const FingerprintTable& table, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "id,fp_hex\n";
  for (std::size_t i = 0; i < table.row_ids.size(); ++i) {
    out << table.row_ids[i] << ',' << table.bits[i].to_hex() << '\n';
  }
}

void check_fingerprints_align(const FingerprintTable& fps, const FeatureTable& table) {
  std::set<std::string_view> ids(table.row_ids().begin(), table.row_ids().end());
  for (const auto& id : fps.row_ids) {
    if (!ids.contains(id)) throw Error(ErrorKind::column_mismatch, "fingerprint id not in table: " + id);
  }
}

// ---------------------------------------------------------------------------
// Normalizer

Normalizer fit_normalizer(const FeatureTable& table, std::span<const std::string> columns) {
  if (table.rows() < 2) throw Error(ErrorKind::insufficient_data, "normalizer needs at least 2 rows");
  Normalizer norm;
  norm.columns.assign(columns.begin(), columns.end());
  const auto d = static_cast<Eigen::Index>(columns.size());
  norm.mean.resize(d);
  norm.stddev.resize(d);
  const double n = static_cast<double>(table.rows());
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd col = table.column(columns[static_cast<std::size_t>(j)]);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / (n - 1.0);
    if (!(var > 0.0)) throw Error(ErrorKind::degenerate_feature, columns[static_cast<std::size_t>(j)]);
    norm.mean(j) = mean;
    norm.stddev(j) = std::sqrt(var);
  }
  return norm;
}

namespace {

template <typename Op>
FeatureTable transform_columns(const Normalizer& normalizer, const FeatureTable& table, Op op) {
  Eigen::MatrixXd values = table.values();
  for (std::size_t j = 0; j < normalizer.columns.size(); ++j) {
    if (!table.has_column(normalizer.columns[j])) {
      throw Error(ErrorKind::column_mismatch, "table lacks normalized column " + normalizer.columns[j]);
    }
    const auto c = static_cast<Eigen::Index>(table.column_index(normalizer.columns[j]));
    const auto k = static_cast<Eigen::Index>(j);
    values.col(c) = op(values.col(c).array(), normalizer.mean(k), normalizer.stddev(k)).matrix();
  }
  return table.with_values(std::move(values));
}

}  // namespace

FeatureTable apply_normalizer(const Normalizer& normalizer, const FeatureTable& table) {
  return transform_columns(normalizer, table,
                           [](const auto& x, double mean, double sd) -> Eigen::ArrayXd { return (x - mean) / sd; });
}

FeatureTable invert_normalizer(const Normalizer& normalizer, const FeatureTable& table) {
  return transform_columns(normalizer, table,
                           [](const auto& x, double mean, double sd) -> Eigen::ArrayXd { return x * sd + mean; });
}

// ---------------------------------------------------------------------------
// Split

TrainTestSplit split_rows(const FeatureTable& table, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "split fraction must lie in (0, 1)");
  }
  const std::size_t n = table.rows();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n < 2 || n_train == 0 || n_train == n) {
    throw Error(ErrorKind::empty_split, "fraction " + format_double(train_fraction) + " of " + std::to_string(n) +
                                            " rows leaves an empty side");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {table.select_rows(train), table.select_rows(test)};
}

}  // namespace causal_al
