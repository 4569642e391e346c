#pragma once

#include "causal_al/causal.hpp"
#include "causal_al/dataio.hpp"
#include "causal_al/graphdist.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace causal_al {

struct ActiveLearningParams {
  std::size_t samples_per_iteration = 50;  // M
  std::size_t iterations = 20;             // N_iter
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  DiscoveryOptions discovery;
  std::optional<std::size_t> top_n;  // spectrum length; default is the node union
  SpectrumMode spectrum_mode = SpectrumMode::singular_values;
};

enum class SelectionRule { active, random };

struct IterationRecord {
  std::size_t iteration = 0;        // 1-based
  std::vector<double> losses;       // s_k per subset; +inf when discovery failed
  std::size_t chosen = 0;           // k*
  double loss = 0.0;                // s_{k*}
  std::size_t dataset_size = 0;     // |D_AL| after the commit
};

struct ActiveLearningRun {
  SelectionRule rule = SelectionRule::active;
  std::vector<std::string> selected_row_ids;  // D_AL in commit order
  std::vector<IterationRecord> records;
  std::uint64_t seed = 0;
  std::size_t samples_per_iteration = 0;
  std::size_t iterations = 0;
  std::size_t n_subsets = 0;

  std::vector<double> loss_trajectory() const;
  /// Ids of D_AL after `iteration` commits.
  std::span<const std::string> snapshot(std::size_t iteration) const;
};

/// Greedy selection: each iteration every subset proposes D_AL plus M fresh
/// rows, the candidate graph closest to `global_graph` wins and its rows are
/// committed. Unchosen samples go back to their pools.
ActiveLearningRun active_learn(std::span<const FeatureTable> subsets, const WeightedDag& global_graph,
                               std::span<const std::string> features, std::string_view target,
                               const ActiveLearningParams& params);

/// Same loop and candidate samples, but the committed subset is drawn uniformly.
ActiveLearningRun random_baseline(std::span<const FeatureTable> subsets, const WeightedDag& global_graph,
                                  std::span<const std::string> features, std::string_view target,
                                  const ActiveLearningParams& params);

ActiveLearningRun run_selection(SelectionRule rule, std::span<const FeatureTable> subsets,
                                const WeightedDag& global_graph, std::span<const std::string> features,
                                std::string_view target, const ActiveLearningParams& params);

struct LossSummary {
  std::vector<double> mean;
  std::vector<double> stddev;  // sample (n-1); zero for a single run
};

LossSummary summarize_runs(std::span<const ActiveLearningRun> runs);

std::string rule_name(SelectionRule rule);
SelectionRule parse_rule(std::string_view text);

/// `iter,subset,loss_0..loss_{K-1},chosen,size`: `subset` is k* and `chosen` its loss.
void save_run_records(const ActiveLearningRun& run, const std::filesystem::path& path);
std::vector<IterationRecord> load_run_records(const std::filesystem::path& path);
/// One row id per line.
void save_id_list(std::span<const std::string> ids, const std::filesystem::path& path);
std::vector<std::string> load_id_list(const std::filesystem::path& path);
void save_loss_summary(const LossSummary& active, const LossSummary* random, const std::filesystem::path& path);

}  // namespace causal_al
