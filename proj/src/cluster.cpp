#include "causal_al/cluster.hpp"

#include "causal_al/error.hpp"
#include "causal_al/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>

namespace causal_al {

namespace {

Eigen::MatrixXd standardized_pivots(const GmmModel& model, const FeatureTable& table) {
  const Eigen::MatrixXd x = table.select_columns(model.pivot_features).values();
  return (x.rowwise() - model.center.transpose()).array().rowwise() / model.scale.transpose().array();
}

// log w_k + log N(z | mu_k, Sigma_k) for every row and component.
Eigen::MatrixXd log_joint(const GmmModel& model, const Eigen::MatrixXd& z) {
  const auto n = z.rows();
  const auto d = z.cols();
  const auto k_count = static_cast<Eigen::Index>(model.n_components());
  Eigen::MatrixXd out(n, k_count);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const Eigen::LLT<Eigen::MatrixXd> llt(model.covariances[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::degenerate_component, "covariance of component " + std::to_string(k) + " is singular");
    }
    const Eigen::MatrixXd l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const Eigen::MatrixXd centered = (z.rowwise() - model.means.row(k)).transpose();
    const Eigen::MatrixXd solved = llt.matrixL().solve(centered);
    const Eigen::VectorXd maha = solved.colwise().squaredNorm().transpose();
    out.col(k) = (std::log(model.weights(k)) - 0.5 * (static_cast<double>(d) * log_2pi + log_det)) -
                 0.5 * maha.array();
  }
  return out;
}

// Row-wise log-sum-exp; returns per-row log-likelihood and fills responsibilities.
Eigen::VectorXd normalize_rows(const Eigen::MatrixXd& log_p, Eigen::MatrixXd& resp) {
  Eigen::VectorXd ll(log_p.rows());
  resp.resize(log_p.rows(), log_p.cols());
  for (Eigen::Index i = 0; i < log_p.rows(); ++i) {
    const double m = log_p.row(i).maxCoeff();
    const Eigen::ArrayXd e = (log_p.row(i).array() - m).exp();
    const double s = e.sum();
    ll(i) = m + std::log(s);
    resp.row(i) = (e / s).matrix().transpose();
  }
  return ll;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& z, std::size_t k, Rng& rng) {
  const auto n = z.rows();
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), z.cols());
  centers.row(0) = z.row(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (z.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
    }
    centers.row(static_cast<Eigen::Index>(c)) = z.row(pick);
    d2 = d2.cwiseMin((z.rowwise() - z.row(pick)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

Eigen::MatrixXd GmmModel::original_means() const {
  return (means.array().rowwise() * scale.transpose().array()).rowwise() + center.transpose().array();
}

Eigen::MatrixXd GmmModel::responsibilities(const FeatureTable& table) const {
  Eigen::MatrixXd resp;
  normalize_rows(log_joint(*this, standardized_pivots(*this, table)), resp);
  return resp;
}

namespace {

void m_step(GmmModel& model, const Eigen::MatrixXd& z, const Eigen::MatrixXd& resp, const Eigen::MatrixXd& floor) {
  const auto n = z.rows();
  for (Eigen::Index k = 0; k < resp.cols(); ++k) {
    const double nk = resp.col(k).sum();
    if (!(nk > 1e-10)) {
      throw Error(ErrorKind::degenerate_component, "component " + std::to_string(k) + " lost all its mass");
    }
    model.weights(k) = nk / static_cast<double>(n);
    model.means.row(k) = (resp.col(k).transpose() * z) / nk;
    const Eigen::MatrixXd centered = z.rowwise() - model.means.row(k);
    Eigen::MatrixXd cov = centered.transpose() * resp.col(k).asDiagonal() * centered / nk;
    cov = 0.5 * (cov + cov.transpose()) + floor;
    model.covariances[static_cast<std::size_t>(k)] = std::move(cov);
  }
}

// Lloyd iterations from k-means++ seeds; the hard partition seeds EM.
Eigen::MatrixXd kmeans_responsibilities(const Eigen::MatrixXd& z, std::size_t k, Rng& rng) {
  Eigen::MatrixXd centers = kmeans_plus_plus(z, k, rng);
  const auto n = z.rows();
  std::vector<Eigen::Index> label(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = (z.row(i) - centers.row(0)).squaredNorm();
      for (Eigen::Index c = 1; c < centers.rows(); ++c) {
        const double d = (z.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (label[static_cast<std::size_t>(i)] != best) {
        label[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centers.rows(), z.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(centers.rows());
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(label[static_cast<std::size_t>(i)]) += z.row(i);
      counts(label[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
    }
  }
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, centers.rows());
  for (Eigen::Index i = 0; i < n; ++i) resp(i, label[static_cast<std::size_t>(i)]) = 1.0;
  return resp;
}

GmmModel run_em(GmmModel model, const Eigen::MatrixXd& z, const GmmOptions& options, Rng& rng) {
  const auto d = z.cols();
  const auto k_count = static_cast<Eigen::Index>(options.n_components);
  const Eigen::MatrixXd floor = options.reg_floor * Eigen::MatrixXd::Identity(d, d);
  model.weights.resize(k_count);
  model.means.resize(k_count, d);
  model.covariances.assign(options.n_components, Eigen::MatrixXd());
  m_step(model, z, kmeans_responsibilities(z, options.n_components, rng), floor);

  Eigen::MatrixXd resp;
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0;; ++iter) {
    const double ll = normalize_rows(log_joint(model, z), resp).mean();
    model.log_likelihood_trace.push_back(ll);
    if (iter > 0 && ll - previous < options.tol) {
      model.converged = true;
      break;
    }
    if (iter == options.max_iter) break;
    previous = ll;
    m_step(model, z, resp, floor);
  }
  return model;
}

}  // namespace

GmmModel fit_gmm(const FeatureTable& table, std::span<const std::string> pivot_features, const GmmOptions& options) {
  if (options.n_components == 0) throw Error(ErrorKind::invalid_argument, "n_components must be positive");
  if (options.n_init == 0) throw Error(ErrorKind::invalid_argument, "n_init must be positive");
  if (pivot_features.empty()) throw Error(ErrorKind::invalid_argument, "no pivot features");
  if (table.rows() < options.n_components || table.rows() < 2) {
    throw Error(ErrorKind::insufficient_data, std::to_string(table.rows()) + " rows for " +
                                                  std::to_string(options.n_components) + " components");
  }
  const Normalizer norm = fit_normalizer(table, pivot_features);

  GmmModel base;
  base.pivot_features.assign(pivot_features.begin(), pivot_features.end());
  base.center = norm.mean;
  base.scale = norm.stddev;
  const Eigen::MatrixXd z = standardized_pivots(base, table);

  std::optional<GmmModel> best;
  std::optional<Error> failure;
  for (std::size_t r = 0; r < options.n_init; ++r) {
    Rng rng(derive_seed(options.seed, r));
    try {
      GmmModel candidate = run_em(base, z, options, rng);
      if (!best || candidate.log_likelihood_trace.back() > best->log_likelihood_trace.back()) {
        best = std::move(candidate);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate_component) throw;
      failure = e;
    }
  }
  if (!best) throw *failure;
  return std::move(*best);
}

std::vector<std::size_t> assign_subsets(const GmmModel& model, const FeatureTable& table) {
  const Eigen::MatrixXd log_p = log_joint(model, standardized_pivots(model, table));
  std::vector<std::size_t> labels(static_cast<std::size_t>(log_p.rows()));
  for (Eigen::Index i = 0; i < log_p.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < log_p.cols(); ++k) {
      if (log_p(i, k) > log_p(i, best)) best = k;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return labels;
}

// ---------------------------------------------------------------------------

namespace {

void write_row(std::ostream& out, std::string_view key, const Eigen::VectorXd& v) {
  out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << format_double(v(i));
  out << '\n';
}

std::vector<double> parse_doubles(const std::vector<std::string>& fields, std::size_t skip) {
  std::vector<double> out;
  for (std::size_t i = skip; i < fields.size(); ++i) {
    try {
      out.push_back(std::stod(fields[i]));
    } catch (const std::exception&) {
      throw Error(ErrorKind::bad_format, "gmm model: not a number '" + fields[i] + "'");
    }
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v, std::size_t expected) {
  if (v.size() != expected) throw Error(ErrorKind::bad_format, "gmm model: vector of wrong length");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_gmm(const GmmModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "gmm_model\n";
  out << "n_components," << model.n_components() << '\n';
  out << "pivot_features";
  for (const auto& p : model.pivot_features) out << ',' << p;
  out << '\n';
  write_row(out, "center", model.center);
  write_row(out, "scale", model.scale);
  write_row(out, "weights", model.weights);
  for (std::size_t k = 0; k < model.n_components(); ++k) {
    write_row(out, "mean," + std::to_string(k), model.means.row(static_cast<Eigen::Index>(k)).transpose());
    out << "covariance," << k << '\n';
    const auto& c = model.covariances[k];
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) out << (j ? "," : "") << format_double(c(r, j));
      out << '\n';
    }
  }
}

GmmModel load_gmm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (trim(line) != "gmm_model") throw Error(ErrorKind::bad_format, path.string() + ": not a gmm model file");
  GmmModel model;
  std::size_t k_count = 0;
  auto next_fields = [&] {
    if (!std::getline(in, line)) throw Error(ErrorKind::bad_format, path.string() + ": truncated");
    return split_csv_line(trim(line));
  };
  auto f = next_fields();
  k_count = std::stoul(f.at(1));
  f = next_fields();
  model.pivot_features.assign(f.begin() + 1, f.end());
  const std::size_t d = model.pivot_features.size();
  model.center = to_vector(parse_doubles(next_fields(), 1), d);
  model.scale = to_vector(parse_doubles(next_fields(), 1), d);
  model.weights = to_vector(parse_doubles(next_fields(), 1), k_count);
  model.means.resize(static_cast<Eigen::Index>(k_count), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < k_count; ++k) {
    model.means.row(static_cast<Eigen::Index>(k)) = to_vector(parse_doubles(next_fields(), 2), d).transpose();
    next_fields();
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r) cov.row(static_cast<Eigen::Index>(r)) = to_vector(parse_doubles(next_fields(), 0), d).transpose();
    model.covariances.push_back(std::move(cov));
  }
  model.converged = true;
  return model;
}

void save_subset_labels(const SubsetLabels& labels, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "id,subset\n";
  for (std::size_t i = 0; i < labels.row_ids.size(); ++i) out << labels.row_ids[i] << ',' << labels.labels[i] << '\n';
}

SubsetLabels load_subset_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  SubsetLabels out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw Error(ErrorKind::bad_format, path.string() + ": expected id,subset");
    out.row_ids.push_back(f[0]);
    try {
      out.labels.push_back(std::stoul(f[1]));
    } catch (const std::exception&) {
      throw Error(ErrorKind::bad_format, path.string() + ": bad subset label '" + f[1] + "'");
    }
  }
  return out;
}

std::vector<FeatureTable> partition_by_labels(const FeatureTable& table, const SubsetLabels& labels,
                                              std::size_t n_subsets) {
  std::map<std::string, std::size_t, std::less<>> label_of;
  for (std::size_t i = 0; i < labels.row_ids.size(); ++i) {
    if (labels.labels[i] >= n_subsets) throw Error(ErrorKind::out_of_range, "subset label out of range");
    label_of[labels.row_ids[i]] = labels.labels[i];
  }
  std::vector<std::vector<std::size_t>> rows(n_subsets);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto it = label_of.find(table.row_ids()[i]);
    if (it != label_of.end()) rows[it->second].push_back(i);
  }
  std::vector<FeatureTable> out;
  for (const auto& r : rows) out.push_back(table.select_rows(r));
  return out;
}

}  // namespace causal_al
