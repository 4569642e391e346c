#pragma once

#include "causal_al/causal.hpp"
#include "causal_al/dataio.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace causal_al {

enum class NoiseFamily {
  uniform,   // U[-scale, scale]
  laplace,   // Laplace(0, scale)
  gaussian,  // N(0, scale^2); negative controls only
  none,      // deterministic node
};

struct NodeNoise {
  NoiseFamily family = NoiseFamily::uniform;
  double scale = 1.0;
  double offset = 0.0;  // constant added to the node's equation
};

struct SemEdge {
  std::string child;
  std::string parent;
  double weight = 0.0;
};

/// Linear SEM x_i = offset_i + sum_j w_ij x_j + noise_i over named nodes.
struct SemSpec {
  std::vector<std::string> nodes;
  std::vector<NodeNoise> noise;
  std::vector<SemEdge> edges;
  std::vector<std::string> targets;
  std::uint64_t seed = 0;

  void add_node(std::string name, NodeNoise n = {});
  void add_edge(std::string child, std::string parent, double weight);
  std::size_t index_of(std::string_view name) const;

  /// Throws NotAcyclic on cycles and InvalidArgument on bad scales or names.
  void validate() const;
  Eigen::MatrixXd weight_matrix() const;
  /// Original-scale ground-truth dag; `target` (if given) must be a sink.
  WeightedDag true_dag(std::optional<std::string> target = std::nullopt) const;
};

/// Line format: `node <name> <uniform|laplace|gaussian|none> <scale> [offset]`,
/// `edge <child> <parent> <weight>`, `target <name>`, `seed <n>`; `#` comments.
SemSpec parse_sem_spec(std::string_view text);
SemSpec load_sem_spec(const std::filesystem::path& path);
std::string format_sem_spec(const SemSpec& spec);

/// Ancestral sampling; row ids are `<prefix><index>`.
FeatureTable sample_sem(const SemSpec& spec, std::size_t n_rows, std::string_view id_prefix = "r");

/// Multiplies the weight of edge parent -> child in one subset.
struct WeightPerturbation {
  std::size_t subset = 0;
  std::string child;
  std::string parent;
  double factor = 1.0;
};

/// Adds a constant to one node's equation in one subset.
struct OffsetPerturbation {
  std::size_t subset = 0;
  std::string node;
  double offset = 0.0;
};

struct WorldOptions {
  std::size_t n_subsets = 3;
  std::size_t matching_subset = 1;
  std::size_t rows_per_subset = 1200;
  std::size_t global_rows = 5000;
  std::vector<WeightPerturbation> perturbations;
  std::vector<OffsetPerturbation> offsets;
  std::uint64_t seed = 0;
};

struct HeterogeneousWorld {
  std::vector<FeatureTable> subsets;
  std::vector<SemSpec> subset_specs;
  FeatureTable global;
  WeightedDag true_global;
};

/// Subset tables drawn from perturbed copies of `shared`; `matching_subset`
/// is drawn from `shared` itself, as is the global table. The matching subset
/// may not carry perturbations.
HeterogeneousWorld make_heterogeneous_world(const SemSpec& shared, const WorldOptions& options);

/// Nine uniform-noise features and a target `y`, with three subsets where
/// subsets 0 and 2 rescale feature-to-feature edges. The feature-to-target
/// equation is shared by all subsets.
SemSpec benchmark_sem();
WorldOptions benchmark_world_options(std::uint64_t seed);

/// Twenty descriptor-like features (three of them the clustering pivots
/// MolLogP, TPSA, MolMR), an intermediate target `polarizability`, and the
/// design target `dipole`. Subsets are shifted along the pivots so a mixture
/// model can separate them.
struct DescriptorWorld {
  SemSpec spec;
  WorldOptions options;
};
DescriptorWorld descriptor_world(std::uint64_t seed);

/// Deterministic fingerprints: bit b is set when a fixed random projection of
/// the row's descriptors exceeds a threshold, so nearby rows share bits.
FingerprintTable synth_fingerprints(const FeatureTable& table, std::span<const std::string> columns, std::size_t width,
                                    std::uint64_t seed);

}  // namespace causal_al
