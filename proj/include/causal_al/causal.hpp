#pragma once

#include "causal_al/dataio.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace causal_al {

enum class WeightScale { standardized, original };

/// Per-node statistics of the data a SEM was fit on.
struct NodeStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;             // sample (n-1)
  Eigen::VectorXd residual_variance;  // in the scale of the owning dag's weights
  std::vector<bool> ridge_fallback;   // OLS was ill-conditioned for this node
};

/// Weighted directed acyclic graph over named nodes.
///
/// weights()(i, j) is the coefficient of parent j in the structural equation
/// of child i, i.e. the weight of edge j -> i. Construction verifies that the
/// weights are strictly lower triangular under causal_order() and, when a
/// target is designated, that the target has no outgoing edges.
class WeightedDag {
 public:
  WeightedDag() = default;

  /// An empty `order` is filled with a topological order (lowest index first).
  WeightedDag(std::vector<std::string> node_names, Eigen::MatrixXd weights,
              std::optional<std::string> target = std::nullopt, std::vector<std::size_t> order = {},
              WeightScale scale = WeightScale::standardized, std::optional<NodeStats> stats = std::nullopt);

  const std::vector<std::string>& node_names() const noexcept { return node_names_; }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  const std::vector<std::size_t>& causal_order() const noexcept { return order_; }
  const std::optional<std::string>& target() const noexcept { return target_; }
  std::optional<std::size_t> target_index() const;
  WeightScale scale() const noexcept { return scale_; }
  const std::optional<NodeStats>& stats() const noexcept { return stats_; }

  std::size_t size() const noexcept { return node_names_.size(); }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  double weight(std::string_view child, std::string_view parent) const;
  std::vector<std::size_t> parents(std::size_t node) const;

  /// Weights rescaled to `scale`; needs stats() unless already in that scale.
  WeightedDag rescaled(WeightScale scale) const;

  /// Same graph with |weight| < threshold set to zero.
  WeightedDag pruned(double threshold) const;

 private:
  std::vector<std::string> node_names_;
  Eigen::MatrixXd weights_;
  std::optional<std::string> target_;
  std::vector<std::size_t> order_;
  WeightScale scale_ = WeightScale::standardized;
  std::optional<NodeStats> stats_;
};

/// Topological order of the nonzero pattern of `weights`, lowest index first
/// among ready nodes. Throws NotAcyclic on a cycle.
std::vector<std::size_t> topological_order(const Eigen::MatrixXd& weights);

/// Edge list `child,parent,weight` after `nodes`/`order`/`target`/`scale` header records.
void save_dag(const WeightedDag& dag, const std::filesystem::path& path);
WeightedDag load_dag(const std::filesystem::path& path);
/// Dense matrix, rows are children and columns parents (same layout as weights()).
void save_adjacency_csv(const WeightedDag& dag, const std::filesystem::path& path);

struct DiscoveryOptions {
  double prune_threshold = 0.05;  // applied on the standardized scale
  bool destandardize = false;
};

/// DirectLiNGAM with the target forced to be a sink.
///
/// Columns are standardized; the causal order is found by repeatedly picking
/// the variable whose pairwise likelihood-ratio scores against the remaining
/// variables show the least evidence of it having a parent, then regressing
/// it out. The target is never a root candidate while features remain.
/// Weights come from least squares of each node on all its predecessors,
/// followed by pruning.
WeightedDag discover_lingam(const FeatureTable& table, std::span<const std::string> nodes, std::string_view target,
                            const DiscoveryOptions& options = {});

/// Uses every column of `table`.
WeightedDag discover_lingam(const FeatureTable& table, std::string_view target, const DiscoveryOptions& options = {});

/// Maximum-entropy approximation of differential entropy for a unit-variance sample.
double entropy_approx(std::span<const double> u);

struct SemFitOptions {
  WeightScale output_scale = WeightScale::original;
  double ridge_penalty = 1e-6;
};

/// Re-estimates every nonzero edge of `structure` by least squares of each
/// node on its parents (standardized, no intercept), then reports the weights
/// in `output_scale`. Means and standard deviations are recorded so the SEM
/// can be evaluated in original units.
WeightedDag fit_sem_weights(const FeatureTable& table, const WeightedDag& structure, const SemFitOptions& options = {});

enum class StrengthMode { total_effect, direct_weight };

struct RankedFeature {
  std::string name;
  double strength = 0.0;
};

using FeatureRanking = std::vector<RankedFeature>;

/// Every non-target node ranked by |effect on target|, descending, ties by name.
FeatureRanking rank_features(const WeightedDag& dag, std::string_view target,
                             StrengthMode mode = StrengthMode::total_effect);

std::vector<std::string> select_top_k(const FeatureRanking& ranking, std::size_t k);

}  // namespace causal_al
