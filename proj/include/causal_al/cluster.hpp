#pragma once

#include "causal_al/dataio.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace causal_al {

struct GmmOptions {
  std::size_t n_components = 3;
  std::uint64_t seed = 0;
  std::size_t n_init = 3;  // restarts; the highest final log-likelihood wins
  std::size_t max_iter = 500;
  double tol = 1e-6;  // on the mean per-row log-likelihood
  double reg_floor = 1e-6;
};

/// Full-covariance Gaussian mixture over standardized pivot features.
///
/// means/covariances live in the standardized space defined by center/scale;
/// original_means() maps them back.
struct GmmModel {
  std::vector<std::string> pivot_features;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;  // component x dim
  std::vector<Eigen::MatrixXd> covariances;
  /// Mean per-row log-likelihood (standardized space) at each EM iteration.
  std::vector<double> log_likelihood_trace;
  bool converged = false;

  std::size_t n_components() const { return static_cast<std::size_t>(weights.size()); }
  std::size_t dim() const { return pivot_features.size(); }
  Eigen::MatrixXd original_means() const;

  /// Posterior component probabilities, rows x components.
  Eigen::MatrixXd responsibilities(const FeatureTable& table) const;
};

/// EM seeded by k-means (k-means++ initial centers); pivots are standardized first.
GmmModel fit_gmm(const FeatureTable& table, std::span<const std::string> pivot_features, const GmmOptions& options);

/// Most probable component per row; ties go to the lowest index.
std::vector<std::size_t> assign_subsets(const GmmModel& model, const FeatureTable& table);

void save_gmm(const GmmModel& model, const std::filesystem::path& path);
GmmModel load_gmm(const std::filesystem::path& path);

struct SubsetLabels {
  std::vector<std::string> row_ids;
  std::vector<std::size_t> labels;
};

/// `id,subset` CSV.
void save_subset_labels(const SubsetLabels& labels, const std::filesystem::path& path);
SubsetLabels load_subset_labels(const std::filesystem::path& path);

/// Splits `table` into one table per label (label order), rows in table order.
/// Rows absent from `labels` are skipped.
std::vector<FeatureTable> partition_by_labels(const FeatureTable& table, const SubsetLabels& labels,
                                              std::size_t n_subsets);

}  // namespace causal_al
