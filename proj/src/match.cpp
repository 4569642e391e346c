#include "causal_al/match.hpp"

#include "causal_al/error.hpp"
#include "causal_al/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace causal_al {

namespace {

std::vector<std::string> shared_features(const FeatureTable& queries, const FeatureTable& reference,
                                         std::string_view target_column) {
  std::vector<std::string> out;
  for (const auto& c : queries.feature_names()) {
    if (c == target_column || queries.is_target(c) || !reference.has_column(c)) continue;
    if (reference.is_target(c)) continue;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::vector<NeighborResult> nearest_in_reference(const FeatureTable& queries, const FeatureTable& reference,
                                                 const MatchOptions& options) {
  if (options.k == 0) throw Error(ErrorKind::invalid_argument, "k must be positive");
  if (reference.rows() == 0) throw Error(ErrorKind::empty_table, "empty reference table");
  const std::vector<std::string> features =
      options.features.empty() ? shared_features(queries, reference, options.target_column) : options.features;
  if (features.empty()) throw Error(ErrorKind::column_mismatch, "query and reference share no feature columns");
  for (const auto& f : features) {
    if (!queries.has_column(f) || !reference.has_column(f)) {
      throw Error(ErrorKind::column_mismatch, "feature " + f + " missing from query or reference");
    }
  }

  const Eigen::MatrixXd q_raw = queries.select_columns(features).values();
  const Eigen::MatrixXd r_raw = reference.select_columns(features).values();
  Eigen::MatrixXd population = q_raw;
  if (options.pooled) {
    population.resize(q_raw.rows() + r_raw.rows(), q_raw.cols());
    population << q_raw, r_raw;
  }
  const auto d = q_raw.cols();
  const auto n_pop = population.rows();
  Eigen::VectorXd mean = n_pop > 0 ? Eigen::VectorXd(population.colwise().mean().transpose())
                                   : Eigen::VectorXd::Zero(d);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(d);
  if (n_pop > 1) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double ss = (population.col(j).array() - mean(j)).square().sum();
      const double sd = std::sqrt(ss / static_cast<double>(n_pop - 1));
      if (sd > 0.0) scale(j) = sd;
    }
  }
  // Column-major d x n so each row vector is contiguous.
  const Eigen::MatrixXd q = ((q_raw.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array())
                                .matrix()
                                .transpose();
  const Eigen::MatrixXd r = ((r_raw.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array())
                                .matrix()
                                .transpose();

  std::optional<Eigen::VectorXd> ref_target;
  if (reference.has_column(options.target_column)) ref_target = reference.column(options.target_column);

  const auto n_ref = static_cast<std::size_t>(r.cols());
  const std::size_t k = std::min(options.k, n_ref);
  std::vector<NeighborResult> results(queries.rows());
  parallel_for(queries.rows(), options.jobs, [&](std::size_t i) {
    const double* qi = q.col(static_cast<Eigen::Index>(i)).data();
    std::vector<std::pair<double, std::size_t>> dist(n_ref);
    for (std::size_t j = 0; j < n_ref; ++j) {
      const double* rj = r.col(static_cast<Eigen::Index>(j)).data();
      double s = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = qi[c] - rj[c];
        s += diff * diff;
      }
      dist[j] = {std::sqrt(s), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    NeighborResult& out = results[i];
    out.query_id = queries.row_ids()[i];
    for (std::size_t m = 0; m < k; ++m) {
      Neighbor nb{reference.row_ids()[dist[m].second], dist[m].first, std::nullopt};
      if (ref_target) nb.ref_target = (*ref_target)(static_cast<Eigen::Index>(dist[m].second));
      out.neighbors.push_back(std::move(nb));
    }
  });
  return results;
}

double tanimoto(const Bitvector& a, const Bitvector& b) {
  if (a.width() != b.width()) {
    throw Error(ErrorKind::width_mismatch, std::to_string(a.width()) + " vs " + std::to_string(b.width()) + " bits");
  }
  std::size_t both = 0;
  std::size_t either = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    both += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
    either += static_cast<std::size_t>(std::popcount(wa[i] | wb[i]));
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

Eigen::MatrixXd PcaProjection::project(const Eigen::MatrixXd& data) const {
  if (data.cols() != mean.size()) throw Error(ErrorKind::column_mismatch, "projection input has the wrong width");
  return (data.rowwise() - mean.transpose()) * components;
}

PcaProjection pca_project(const Eigen::MatrixXd& data, std::size_t n_components) {
  const auto n = data.rows();
  const auto d = data.cols();
  const auto k = static_cast<Eigen::Index>(n_components);
  if (k == 0) throw Error(ErrorKind::invalid_argument, "n_components must be positive");
  if (n < 2 || n < k) {
    throw Error(ErrorKind::insufficient_data, std::to_string(n) + " rows for " + std::to_string(k) + " components");
  }
  if (k > d) throw Error(ErrorKind::invalid_argument, "more components than columns");

  PcaProjection out;
  out.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd x = data.rowwise() - out.mean.transpose();
  const double denom = static_cast<double>(n - 1);
  out.components.resize(d, k);
  out.explained_variance.resize(k);
  if (d <= n) {
    const Eigen::MatrixXd cov = x.transpose() * x / denom;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    for (Eigen::Index c = 0; c < k; ++c) {
      out.explained_variance(c) = std::max(0.0, eig.eigenvalues()(d - 1 - c));
      out.components.col(c) = eig.eigenvectors().col(d - 1 - c);
    }
  } else {
    const Eigen::MatrixXd gram = x * x.transpose() / denom;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    for (Eigen::Index c = 0; c < k; ++c) {
      const double lambda = std::max(0.0, eig.eigenvalues()(n - 1 - c));
      out.explained_variance(c) = lambda;
      Eigen::VectorXd v = x.transpose() * eig.eigenvectors().col(n - 1 - c);
      const double norm = v.norm();
      if (norm > 0.0) v /= norm;
      out.components.col(c) = v;
    }
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    out.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.components(arg, c) < 0.0) out.components.col(c) *= -1.0;
  }
  out.coordinates = x * out.components;
  return out;
}

PcaProjection pca_project(const FeatureTable& table, std::span<const std::string> columns, std::size_t n_components) {
  return pca_project(table.select_columns(columns).values(), n_components);
}

PcaProjection pca_project(const FingerprintTable& fingerprints, std::size_t n_components) {
  return pca_project(fingerprints.to_matrix(), n_components);
}

std::string InterventionReport::bucket_label() const { return ">" + format_double(threshold) + " Debye"; }

InterventionReport intervention_report(const FeatureTable& original, std::span<const InterventionPlan> plans,
                                       std::span<const NeighborResult> neighbors,
                                       const FingerprintTable* query_fingerprints,
                                       const FingerprintTable* reference_fingerprints,
                                       const ReportOptions& options) {
  if (!(options.bin_width > 0.0)) throw Error(ErrorKind::invalid_argument, "bin width must be positive");
  if (!original.has_column(options.target_column)) {
    throw Error(ErrorKind::missing_column, "original table has no column " + options.target_column);
  }
  std::map<std::string, const NeighborResult*, std::less<>> by_query;
  for (const auto& nr : neighbors) {
    std::string_view id = nr.query_id;
    if (id.ends_with(kIntervenedSuffix)) id.remove_suffix(kIntervenedSuffix.size());
    by_query[std::string(id)] = &nr;
  }

  InterventionReport report;
  report.threshold = options.threshold;
  const Eigen::VectorXd target = original.column(options.target_column);
  std::vector<double> before;
  std::vector<double> after;
  std::vector<double> matched;
  for (const auto& plan : plans) {
    const auto row = original.find_row(plan.row_id);
    if (!row) throw Error(ErrorKind::unknown_row, "plan row " + plan.row_id + " is not in the original table");
    const auto it = by_query.find(plan.row_id);
    if (it == by_query.end() || it->second->neighbors.empty()) {
      throw Error(ErrorKind::unknown_row, "no neighbor result for " + plan.row_id);
    }
    const Neighbor& nearest = it->second->neighbors.front();
    if (!nearest.ref_target) {
      throw Error(ErrorKind::missing_column, "reference has no column " + options.target_column);
    }
    const double y0 = target(static_cast<Eigen::Index>(*row));
    before.push_back(y0);
    after.push_back(plan.predicted_after);
    matched.push_back(*nearest.ref_target);
    if (y0 > options.threshold) ++report.originally_above;
    if (*nearest.ref_target > options.threshold) report.matched_above.push_back(plan.row_id);

    SimilarityPoint point{plan.row_id, nearest.ref_id, nearest.distance, std::nullopt};
    if (query_fingerprints && reference_fingerprints) {
      const auto qa = query_fingerprints->find_row(plan.row_id);
      const auto rb = reference_fingerprints->find_row(nearest.ref_id);
      if (qa && rb) point.tanimoto = tanimoto(query_fingerprints->bits[*qa], reference_fingerprints->bits[*rb]);
    }
    report.similarity.push_back(std::move(point));
  }

  if (!before.empty()) {
    double lo = before.front();
    double hi = before.front();
    for (const auto* series : {&before, &after, &matched}) {
      for (double v : *series) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    const double w = options.bin_width;
    const auto first = static_cast<long long>(std::floor((lo - options.threshold) / w));
    const auto last = static_cast<long long>(std::floor((hi - options.threshold) / w));
    for (long long m = first; m <= last; ++m) {
      HistogramBin bin;
      bin.lower = options.threshold + static_cast<double>(m) * w;
      bin.upper = options.threshold + static_cast<double>(m + 1) * w;
      bin.above_threshold = m >= 0;
      report.histogram.push_back(bin);
    }
    auto bin_of = [&](double v) {
      const auto m = static_cast<long long>(std::floor((v - options.threshold) / w));
      return static_cast<std::size_t>(std::clamp(m, first, last) - first);
    };
    for (double v : before) ++report.histogram[bin_of(v)].original;
    for (double v : after) ++report.histogram[bin_of(v)].intervened;
    for (double v : matched) ++report.histogram[bin_of(v)].matched;
  }
  return report;
}

void save_neighbors(std::span<const NeighborResult> results, const std::filesystem::path& path,
                    std::string_view target_column) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "query_id,rank,ref_id,distance,ref_" << target_column << '\n';
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.neighbors.size(); ++i) {
      const auto& nb = r.neighbors[i];
      out << r.query_id << ',' << i + 1 << ',' << nb.ref_id << ',' << format_double(nb.distance) << ','
          << (nb.ref_target ? format_double(*nb.ref_target) : std::string()) << '\n';
    }
  }
}

std::vector<NeighborResult> load_neighbors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<NeighborResult> out;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    auto f = split_csv_line(t);
    if (f.size() == 4) f.emplace_back();
    if (f.size() != 5) throw Error(ErrorKind::bad_format, path.string() + ": neighbor rows need 5 fields");
    if (out.empty() || out.back().query_id != f[0]) out.push_back({f[0], {}});
    Neighbor nb;
    nb.ref_id = f[2];
    try {
      nb.distance = std::stod(f[3]);
      if (!trim(f[4]).empty()) nb.ref_target = std::stod(f[4]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::bad_format, path.string() + ": non-numeric neighbor field");
    }
    out.back().neighbors.push_back(std::move(nb));
  }
  return out;
}

void save_pca(const PcaProjection& pca, std::span<const std::string> row_ids, std::span<const std::string> groups,
              const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "id,group";
  for (Eigen::Index c = 0; c < pca.coordinates.cols(); ++c) out << ",pc" << c + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < pca.coordinates.rows(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    out << row_ids[u] << ',' << (u < groups.size() ? groups[u] : std::string());
    for (Eigen::Index c = 0; c < pca.coordinates.cols(); ++c) out << ',' << format_double(pca.coordinates(i, c));
    out << '\n';
  }
}

void save_report(const InterventionReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::missing_file, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("histogram.csv");
    out << "lower,upper,original,intervened,matched,above_threshold\n";
    for (const auto& b : report.histogram) {
      out << format_double(b.lower) << ',' << format_double(b.upper) << ',' << b.original << ',' << b.intervened
          << ',' << b.matched << ',' << (b.above_threshold ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open("similarity.csv");
    out << "query_id,ref_id,distance,tanimoto\n";
    for (const auto& p : report.similarity) {
      out << p.query_id << ',' << p.ref_id << ',' << format_double(p.distance) << ','
          << (p.tanimoto ? format_double(*p.tanimoto) : std::string()) << '\n';
    }
  }
  {
    auto out = open("matched_above.txt");
    for (const auto& id : report.matched_above) out << id << '\n';
  }
  auto out = open("summary.txt");
  out << "threshold = " << format_double(report.threshold) << '\n';
  out << "bucket = " << report.bucket_label() << '\n';
  out << "molecules = " << report.similarity.size() << '\n';
  out << "originally_above = " << report.originally_above << '\n';
  out << "matched_above = " << report.matched_above.size() << '\n';
}

}  // namespace causal_al
