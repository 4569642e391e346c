#pragma once

#include "causal_al/active.hpp"
#include "causal_al/dataio.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace causal_al {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t min_leaf = 2;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

/// Axis-aligned regression tree stored as a flat node array; node 0 is the root.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x <= threshold goes left
    std::size_t left = 0;
    std::size_t right = 0;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(const double* x) const;
  std::size_t depth() const;
};

struct ForestModel {
  std::vector<std::string> feature_names;
  std::string target;
  ForestParams params;
  std::vector<RegressionTree> trees;

  /// Mean of the tree predictions, one per row of `table`.
  Eigen::VectorXd predict(const FeatureTable& table) const;
  double predict_row(const Eigen::VectorXd& x) const;
};

/// Bootstrap-aggregated CART trees with sqrt(d) candidate features per split.
ForestModel fit_forest(const FeatureTable& train, std::span<const std::string> features, std::string_view target,
                       const ForestParams& params = {});

/// 1 - SS_res/SS_tot; a constant `y_true` raises DegenerateTarget.
double r2_score(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double r2(const ForestModel& model, const FeatureTable& test);

struct AccuracyTrace {
  std::vector<double> r2;  // one per iteration
  double reference = 0.0;  // forest fit on every row of the pool
};

/// Refits on each D_AL snapshot of `run` (ids looked up in `pool`, rows kept in
/// pool order) and scores on `test`.
AccuracyTrace accuracy_trace(const ActiveLearningRun& run, const FeatureTable& pool, const FeatureTable& test,
                             std::span<const std::string> features, std::string_view target,
                             const ForestParams& params);

/// `y_true,y_pred` CSV.
void save_parity(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred, const std::filesystem::path& path);

}  // namespace causal_al
