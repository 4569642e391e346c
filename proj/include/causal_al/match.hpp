#pragma once

#include "causal_al/dataio.hpp"
#include "causal_al/intervene.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace causal_al {

struct Neighbor {
  std::string ref_id;
  double distance = 0.0;
  std::optional<double> ref_target;
};

struct NeighborResult {
  std::string query_id;
  std::vector<Neighbor> neighbors;  // nearest first
};

struct MatchOptions {
  std::size_t k = 1;
  /// Empty means every non-target column the two tables share, in query order.
  std::vector<std::string> features;
  /// Normalize with statistics of queries and references together instead of
  /// the queries alone.
  bool pooled = false;
  /// Reference column copied into each neighbor, when present.
  std::string target_column = "dipole";
  std::size_t jobs = 1;
};

/// Exact Euclidean k-NN in z-scored feature space. Columns whose spread is
/// zero in the normalizing population are left unscaled. Ties are broken by
/// reference row order; k is clamped to the reference size.
std::vector<NeighborResult> nearest_in_reference(const FeatureTable& queries, const FeatureTable& reference,
                                                 const MatchOptions& options = {});

/// |a and b| / |a or b|, 1 for two empty fingerprints.
double tanimoto(const Bitvector& a, const Bitvector& b);

struct PcaProjection {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;           // dim x n_components, orthonormal columns
  Eigen::VectorXd explained_variance;   // nonincreasing, sample (n-1) normalization
  Eigen::MatrixXd coordinates;          // rows x n_components

  Eigen::MatrixXd project(const Eigen::MatrixXd& data) const;
};

/// Principal components of the mean-centered rows of `data`; each component's
/// largest-magnitude loading is made positive.
PcaProjection pca_project(const Eigen::MatrixXd& data, std::size_t n_components = 2);
PcaProjection pca_project(const FeatureTable& table, std::span<const std::string> columns,
                          std::size_t n_components = 2);
PcaProjection pca_project(const FingerprintTable& fingerprints, std::size_t n_components = 2);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t original = 0;
  std::size_t intervened = 0;  // SEM-predicted target after intervention
  std::size_t matched = 0;     // target of the nearest reference molecule
  bool above_threshold = false;
};

struct SimilarityPoint {
  std::string query_id;
  std::string ref_id;
  double distance = 0.0;
  std::optional<double> tanimoto;
};

struct InterventionReport {
  double threshold = 3.0;
  std::vector<HistogramBin> histogram;
  std::vector<SimilarityPoint> similarity;
  std::size_t originally_above = 0;
  std::vector<std::string> matched_above;  // query rows whose nearest reference exceeds the threshold
  std::string bucket_label() const;
};

struct ReportOptions {
  double threshold = 3.0;
  double bin_width = 0.5;
  std::string target_column = "dipole";
};

/// Summarizes plans against their nearest reference molecules. `original`
/// supplies the pre-intervention target; fingerprints, when given, add
/// Tanimoto similarity between each molecule and its match. Neighbor query
/// ids may carry the intervened suffix.
InterventionReport intervention_report(const FeatureTable& original, std::span<const InterventionPlan> plans,
                                       std::span<const NeighborResult> neighbors,
                                       const FingerprintTable* query_fingerprints,
                                       const FingerprintTable* reference_fingerprints,
                                       const ReportOptions& options = {});

/// `query_id,rank,ref_id,distance,ref_dipole`; the last header field names the target column.
void save_neighbors(std::span<const NeighborResult> results, const std::filesystem::path& path,
                    std::string_view target_column = "dipole");
std::vector<NeighborResult> load_neighbors(const std::filesystem::path& path);
void save_pca(const PcaProjection& pca, std::span<const std::string> row_ids, std::span<const std::string> groups,
              const std::filesystem::path& path);
void save_report(const InterventionReport& report, const std::filesystem::path& dir);

}  // namespace causal_al
