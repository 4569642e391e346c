#include "causal_al/causal.hpp"

#include "causal_al/error.hpp"
#include "causal_al/intervene.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

namespace causal_al {

namespace {

constexpr double kMinVariance = 1e-24;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v(i));
  }
  return out;
}

double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

struct ColumnStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

ColumnStats column_stats(const Eigen::MatrixXd& x, std::span<const std::string> names) {
  const double n = static_cast<double>(x.rows());
  ColumnStats s{x.colwise().mean().transpose(), Eigen::VectorXd(x.cols())};
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().sum() / (n - 1.0);
    if (!(var > kMinVariance) || !std::isfinite(var)) {
      throw Error(ErrorKind::degenerate_feature, names[static_cast<std::size_t>(j)] + " has zero variance");
    }
    s.stddev(j) = std::sqrt(var);
  }
  return s;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& x, const ColumnStats& s) {
  return (x.rowwise() - s.mean.transpose()).array().rowwise() / s.stddev.transpose().array();
}

struct LeastSquares {
  Eigen::VectorXd coef;
  double residual_variance = 0.0;
  bool ridge = false;
};

// Least squares without intercept on centered columns via the normal
// equations; ill-conditioned systems get a small ridge penalty instead.
LeastSquares least_squares(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& y, double ridge_penalty) {
  const double denom = static_cast<double>(y.size()) - 1.0;
  LeastSquares out;
  if (predictors.cols() == 0) {
    out.coef = Eigen::VectorXd(0);
    out.residual_variance = y.squaredNorm() / denom;
    return out;
  }
  Eigen::MatrixXd gram = predictors.transpose() * predictors / denom;
  const Eigen::VectorXd rhs = predictors.transpose() * y / denom;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12) || !ldlt.isPositive()) {
    gram.diagonal().array() += ridge_penalty;
    ldlt.compute(gram);
    out.ridge = true;
  }
  out.coef = ldlt.solve(rhs);
  out.residual_variance = (y - predictors * out.coef).squaredNorm() / denom;
  return out;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& z, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(z.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = z.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

// Pairwise likelihood-ratio causal ordering on standardized data. `sink`, when
// set, is withheld from root selection until it is the only node left.
std::vector<std::size_t> direct_causal_order(Eigen::MatrixXd x, std::optional<std::size_t> sink) {
  const auto d = static_cast<std::size_t>(x.cols());
  const Eigen::Index n = x.rows();
  const double nd = static_cast<double>(n);
  std::vector<std::size_t> remaining(d);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<std::size_t> order;
  order.reserve(d);

  Eigen::MatrixXd xs(n, static_cast<Eigen::Index>(d));
  Eigen::VectorXd entropy(static_cast<Eigen::Index>(d));
  Eigen::VectorXd scratch(n);

  auto normalized_entropy = [&](const Eigen::VectorXd& r) {
    const double mean = r.mean();
    const double sd = std::sqrt((r.array() - mean).square().sum() / nd);
    scratch = (r.array() - mean) / std::max(sd, 1e-300);
    return entropy_approx({scratch.data(), static_cast<std::size_t>(n)});
  };

  while (!remaining.empty()) {
    std::vector<std::size_t> candidates;
    for (auto i : remaining) {
      if (!(sink && *sink == i && remaining.size() > 1)) candidates.push_back(i);
    }

    std::size_t root = candidates.front();
    if (candidates.size() > 1) {
      for (auto i : remaining) {
        const auto c = static_cast<Eigen::Index>(i);
        const double mean = x.col(c).mean();
        const double sd = std::sqrt((x.col(c).array() - mean).square().sum() / nd);
        xs.col(c) = (x.col(c).array() - mean) / std::max(sd, 1e-300);
        entropy(c) = entropy_approx({xs.col(c).data(), static_cast<std::size_t>(n)});
      }
      std::map<std::size_t, double> score;
      for (auto i : remaining) score[i] = 0.0;
      for (std::size_t a = 0; a < remaining.size(); ++a) {
        for (std::size_t b = a + 1; b < remaining.size(); ++b) {
          const auto i = static_cast<Eigen::Index>(remaining[a]);
          const auto j = static_cast<Eigen::Index>(remaining[b]);
          const double rho = xs.col(i).dot(xs.col(j)) / nd;
          const double h_ri = normalized_entropy(xs.col(i) - rho * xs.col(j));
          const double h_rj = normalized_entropy(xs.col(j) - rho * xs.col(i));
          // Positive when i -> j is the better-supported direction.
          const double diff = (entropy(j) + h_ri) - (entropy(i) + h_rj);
          score[remaining[a]] += std::pow(std::min(0.0, diff), 2);
          score[remaining[b]] += std::pow(std::min(0.0, -diff), 2);
        }
      }
      double best = std::numeric_limits<double>::infinity();
      for (auto i : candidates) {
        if (score[i] < best) {
          best = score[i];
          root = i;
        }
      }
    }

    const auto r = static_cast<Eigen::Index>(root);
    const double root_mean = x.col(r).mean();
    const Eigen::VectorXd root_centered = x.col(r).array() - root_mean;
    const double root_var = root_centered.squaredNorm();
    for (auto k : remaining) {
      if (k == root || root_var <= kMinVariance) continue;
      const auto c = static_cast<Eigen::Index>(k);
      const double coef = (x.col(c).array() - x.col(c).mean()).matrix().dot(root_centered) / root_var;
      x.col(c) -= coef * x.col(r);
    }
    order.push_back(root);
    remaining.erase(std::find(remaining.begin(), remaining.end(), root));
  }
  return order;
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightedDag

std::vector<std::size_t> topological_order(const Eigen::MatrixXd& weights) {
  const auto d = static_cast<std::size_t>(weights.rows());
  std::vector<std::size_t> pending_parents(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) ++pending_parents[i];
    }
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < d; ++i) {
    if (pending_parents[i] == 0) ready.insert(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t next = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(next);
    for (std::size_t child = 0; child < d; ++child) {
      if (weights(static_cast<Eigen::Index>(child), static_cast<Eigen::Index>(next)) != 0.0 &&
          --pending_parents[child] == 0) {
        ready.insert(child);
      }
    }
  }
  if (order.size() != d) throw Error(ErrorKind::not_acyclic, "weighted adjacency contains a cycle");
  return order;
}

WeightedDag::WeightedDag(std::vector<std::string> node_names, Eigen::MatrixXd weights,
                         std::optional<std::string> target, std::vector<std::size_t> order, WeightScale scale,
                         std::optional<NodeStats> stats)
    : node_names_(std::move(node_names)),
      weights_(std::move(weights)),
      target_(std::move(target)),
      order_(std::move(order)),
      scale_(scale),
      stats_(std::move(stats)) {
  const auto d = node_names_.size();
  if (static_cast<std::size_t>(weights_.rows()) != d || static_cast<std::size_t>(weights_.cols()) != d) {
    throw Error(ErrorKind::node_mismatch, "weight matrix is not " + std::to_string(d) + "x" + std::to_string(d));
  }
  if (std::set<std::string>(node_names_.begin(), node_names_.end()).size() != d) {
    throw Error(ErrorKind::node_mismatch, "duplicate node names");
  }
  if (order_.empty() && d > 0) order_ = topological_order(weights_);

  std::vector<std::size_t> position(d, d);
  if (order_.size() != d) throw Error(ErrorKind::not_acyclic, "causal order is not a permutation of the nodes");
  for (std::size_t p = 0; p < d; ++p) {
    if (order_[p] >= d || position[order_[p]] != d) {
      throw Error(ErrorKind::not_acyclic, "causal order is not a permutation of the nodes");
    }
    position[order_[p]] = p;
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0 && position[j] >= position[i]) {
        throw Error(ErrorKind::not_acyclic,
                    "edge " + node_names_[j] + " -> " + node_names_[i] + " violates the causal order");
      }
    }
  }
  if (target_) {
    const auto t = static_cast<Eigen::Index>(index_of(*target_));
    if (!weights_.col(t).isZero(0.0)) {
      throw Error(ErrorKind::not_acyclic, "target " + *target_ + " has outgoing edges");
    }
  }
  if (stats_) {
    const auto sd = static_cast<Eigen::Index>(d);
    if (stats_->mean.size() != sd || stats_->stddev.size() != sd || stats_->residual_variance.size() != sd) {
      throw Error(ErrorKind::node_mismatch, "node statistics have the wrong length");
    }
    stats_->ridge_fallback.resize(d, false);
  }
}

std::optional<std::size_t> WeightedDag::find(std::string_view name) const {
  const auto it = std::find(node_names_.begin(), node_names_.end(), name);
  if (it == node_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - node_names_.begin());
}

std::size_t WeightedDag::index_of(std::string_view name) const {
  const auto idx = find(name);
  if (!idx) throw Error(ErrorKind::unknown_node, std::string(name));
  return *idx;
}

std::optional<std::size_t> WeightedDag::target_index() const {
  if (!target_) return std::nullopt;
  return index_of(*target_);
}

double WeightedDag::weight(std::string_view child, std::string_view parent) const {
  return weights_(static_cast<Eigen::Index>(index_of(child)), static_cast<Eigen::Index>(index_of(parent)));
}

std::vector<std::size_t> WeightedDag::parents(std::size_t node) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j) {
    if (weights_(static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(j)) != 0.0) out.push_back(j);
  }
  return out;
}

WeightedDag WeightedDag::rescaled(WeightScale scale) const {
  if (scale == scale_) return *this;
  if (!stats_) throw Error(ErrorKind::invalid_argument, "rescaling a dag requires node statistics");
  const Eigen::VectorXd& sd = stats_->stddev;
  // original(i, j) = standardized(i, j) * sd_i / sd_j
  Eigen::MatrixXd ratio = sd * sd.cwiseInverse().transpose();
  NodeStats stats = *stats_;
  Eigen::MatrixXd w;
  if (scale == WeightScale::original) {
    w = weights_.cwiseProduct(ratio);
    stats.residual_variance = stats_->residual_variance.cwiseProduct(sd.cwiseAbs2());
  } else {
    w = weights_.cwiseQuotient(ratio);
    stats.residual_variance = stats_->residual_variance.cwiseQuotient(sd.cwiseAbs2());
  }
  return WeightedDag(node_names_, std::move(w), target_, order_, scale, std::move(stats));
}

WeightedDag WeightedDag::pruned(double threshold) const {
  Eigen::MatrixXd w = (weights_.array().abs() < threshold).select(0.0, weights_);
  return WeightedDag(node_names_, std::move(w), target_, order_, scale_, stats_);
}

// ---------------------------------------------------------------------------
// Persistence

void save_dag(const WeightedDag& dag, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "nodes," << join(dag.node_names()) << '\n';
  std::vector<std::string> order_names;
  for (auto i : dag.causal_order()) order_names.push_back(dag.node_names()[i]);
  out << "order," << join(order_names) << '\n';
  if (dag.target()) out << "target," << *dag.target() << '\n';
  out << "scale," << (dag.scale() == WeightScale::standardized ? "standardized" : "original") << '\n';
  if (const auto& s = dag.stats()) {
    out << "mean," << join(s->mean) << '\n';
    out << "stddev," << join(s->stddev) << '\n';
    out << "residual_variance," << join(s->residual_variance) << '\n';
    out << "ridge";
    for (bool r : s->ridge_fallback) out << ',' << (r ? 1 : 0);
    out << '\n';
  }
  out << "child,parent,weight\n";
  const auto& w = dag.weights();
  for (std::size_t i = 0; i < dag.size(); ++i) {
    for (std::size_t j = 0; j < dag.size(); ++j) {
      const double v = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != 0.0) out << dag.node_names()[i] << ',' << dag.node_names()[j] << ',' << format_double(v) << '\n';
    }
  }
}

namespace {

Eigen::VectorXd parse_vector(const std::vector<std::string>& fields, std::size_t expected, const std::string& what) {
  if (fields.size() != expected + 1) throw Error(ErrorKind::bad_format, what + " has the wrong length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) {
    try {
      v(static_cast<Eigen::Index>(i)) = std::stod(fields[i + 1]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::bad_format, what + ": not a number '" + fields[i + 1] + "'");
    }
  }
  return v;
}

}  // namespace

WeightedDag load_dag(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  std::vector<std::string> names;
  std::vector<std::string> order_names;
  std::optional<std::string> target;
  WeightScale scale = WeightScale::standardized;
  std::map<std::string, std::vector<std::string>> stat_lines;
  std::string line;
  bool in_edges = false;
  std::vector<std::array<std::string, 3>> edges;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (in_edges) {
      if (fields.size() != 3) throw Error(ErrorKind::bad_format, path.string() + ": edge lines need 3 fields");
      edges.push_back({fields[0], fields[1], fields[2]});
      continue;
    }
    const std::string key = fields.front();
    fields.erase(fields.begin());
    if (key == "nodes") {
      names = fields;
    } else if (key == "order") {
      order_names = fields;
    } else if (key == "target") {
      if (!fields.empty() && !fields[0].empty()) target = fields[0];
    } else if (key == "scale") {
      scale = (!fields.empty() && fields[0] == "original") ? WeightScale::original : WeightScale::standardized;
    } else if (key == "child") {
      in_edges = true;
    } else {
      fields.insert(fields.begin(), key);
      stat_lines[key] = fields;
    }
  }
  if (names.empty()) throw Error(ErrorKind::bad_format, path.string() + ": missing nodes record");
  const auto d = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  auto index = [&](const std::string& n) {
    const auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end()) throw Error(ErrorKind::unknown_node, n + " in " + path.string());
    return static_cast<Eigen::Index>(it - names.begin());
  };
  for (const auto& e : edges) {
    try {
      w(index(e[0]), index(e[1])) = std::stod(e[2]);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::bad_format, path.string() + ": bad weight '" + e[2] + "'");
    }
  }
  std::vector<std::size_t> order;
  for (const auto& n : order_names) order.push_back(static_cast<std::size_t>(index(n)));

  std::optional<NodeStats> stats;
  if (stat_lines.contains("mean") && stat_lines.contains("stddev") && stat_lines.contains("residual_variance")) {
    NodeStats s;
    s.mean = parse_vector(stat_lines["mean"], names.size(), "mean");
    s.stddev = parse_vector(stat_lines["stddev"], names.size(), "stddev");
    s.residual_variance = parse_vector(stat_lines["residual_variance"], names.size(), "residual_variance");
    if (auto it = stat_lines.find("ridge"); it != stat_lines.end()) {
      for (std::size_t i = 1; i < it->second.size(); ++i) s.ridge_fallback.push_back(it->second[i] == "1");
    }
    stats = std::move(s);
  }
  return WeightedDag(std::move(names), std::move(w), std::move(target), std::move(order), scale, std::move(stats));
}

void save_adjacency_csv(const WeightedDag& dag, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "child";
  for (const auto& n : dag.node_names()) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < dag.size(); ++i) {
    out << dag.node_names()[i];
    for (std::size_t j = 0; j < dag.size(); ++j) {
      out << ',' << format_double(dag.weights()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Discovery

double entropy_approx(std::span<const double> u) {
  constexpr double k1 = 79.047;
  constexpr double k2 = 7.4129;
  constexpr double gamma = 0.37457;
  double sum_logcosh = 0.0;
  double sum_gauss = 0.0;
  for (double v : u) {
    sum_logcosh += log_cosh(v);
    sum_gauss += v * std::exp(-0.5 * v * v);
  }
  const double n = static_cast<double>(u.size());
  const double a = sum_logcosh / n - gamma;
  const double b = sum_gauss / n;
  return (1.0 + std::log(2.0 * std::numbers::pi)) / 2.0 - k1 * a * a - k2 * b * b;
}

WeightedDag discover_lingam(const FeatureTable& table, std::span<const std::string> nodes, std::string_view target,
                            const DiscoveryOptions& options) {
  const std::size_t d = nodes.size();
  const auto target_it = std::find(nodes.begin(), nodes.end(), target);
  if (target_it == nodes.end()) throw Error(ErrorKind::unknown_node, "target " + std::string(target) + " not a node");
  const auto target_idx = static_cast<std::size_t>(target_it - nodes.begin());
  if (table.rows() < d + 10) {
    throw Error(ErrorKind::insufficient_data, "discovery over " + std::to_string(d) + " nodes needs at least " +
                                                  std::to_string(d + 10) + " rows, got " +
                                                  std::to_string(table.rows()));
  }

  const Eigen::MatrixXd x = table.select_columns(nodes).values();
  const ColumnStats cs = column_stats(x, nodes);
  const Eigen::MatrixXd z = standardize(x, cs);

  const auto order = direct_causal_order(z, target_idx);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  NodeStats stats{cs.mean, cs.stddev, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)), std::vector<bool>(d, false)};
  for (std::size_t p = 0; p < d; ++p) {
    const auto node = static_cast<Eigen::Index>(order[p]);
    const std::span<const std::size_t> preds(order.data(), p);
    const auto fit = least_squares(gather_columns(z, preds), z.col(node), SemFitOptions{}.ridge_penalty);
    for (std::size_t k = 0; k < p; ++k) w(node, static_cast<Eigen::Index>(preds[k])) = fit.coef(static_cast<Eigen::Index>(k));
    stats.residual_variance(node) = fit.residual_variance;
    stats.ridge_fallback[order[p]] = fit.ridge;
  }

  WeightedDag dag(std::vector<std::string>(nodes.begin(), nodes.end()), std::move(w), std::string(target), order,
                  WeightScale::standardized, std::move(stats));
  dag = dag.pruned(options.prune_threshold);
  return options.destandardize ? dag.rescaled(WeightScale::original) : dag;
}

WeightedDag discover_lingam(const FeatureTable& table, std::string_view target, const DiscoveryOptions& options) {
  return discover_lingam(table, table.feature_names(), target, options);
}

WeightedDag fit_sem_weights(const FeatureTable& table, const WeightedDag& structure, const SemFitOptions& options) {
  const auto& names = structure.node_names();
  const std::size_t d = names.size();
  if (table.rows() < 2) throw Error(ErrorKind::insufficient_data, "SEM fit needs at least 2 rows");
  const Eigen::MatrixXd x = table.select_columns(names).values();
  const ColumnStats cs = column_stats(x, names);
  const Eigen::MatrixXd z = standardize(x, cs);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  NodeStats stats{cs.mean, cs.stddev, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)), std::vector<bool>(d, false)};
  for (std::size_t i = 0; i < d; ++i) {
    const auto parents = structure.parents(i);
    const auto fit = least_squares(gather_columns(z, parents), z.col(static_cast<Eigen::Index>(i)), options.ridge_penalty);
    for (std::size_t k = 0; k < parents.size(); ++k) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(parents[k])) = fit.coef(static_cast<Eigen::Index>(k));
    }
    stats.residual_variance(static_cast<Eigen::Index>(i)) = fit.residual_variance;
    stats.ridge_fallback[i] = fit.ridge;
  }
  WeightedDag fitted(names, std::move(w), structure.target(), structure.causal_order(), WeightScale::standardized,
                     std::move(stats));
  return fitted.rescaled(options.output_scale);
}

// ---------------------------------------------------------------------------
// Ranking

FeatureRanking rank_features(const WeightedDag& dag, std::string_view target, StrengthMode mode) {
  const auto t = static_cast<Eigen::Index>(dag.index_of(target));
  Eigen::MatrixXd strengths;
  if (mode == StrengthMode::total_effect) {
    strengths = total_effects(dag).total;
  } else {
    strengths = dag.weights();
  }
  FeatureRanking ranking;
  for (std::size_t j = 0; j < dag.size(); ++j) {
    if (static_cast<Eigen::Index>(j) == t) continue;
    ranking.push_back({dag.node_names()[j], std::abs(strengths(t, static_cast<Eigen::Index>(j)))});
  }
  std::sort(ranking.begin(), ranking.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.strength != b.strength) return a.strength > b.strength;
    return a.name < b.name;
  });
  return ranking;
}

std::vector<std::string> select_top_k(const FeatureRanking& ranking, std::size_t k) {
  if (k == 0 || k > ranking.size()) {
    throw Error(ErrorKind::out_of_range,
                "k = " + std::to_string(k) + " outside [1, " + std::to_string(ranking.size()) + "]");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranking[i].name);
  return out;
}

}  // namespace causal_al
