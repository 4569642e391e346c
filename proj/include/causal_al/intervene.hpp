#pragma once

#include "causal_al/causal.hpp"
#include "causal_al/dataio.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace causal_al {

/// total(i, j) is the total causal effect of node j on node i: the sum over
/// directed paths j ~> i of the product of edge weights. Diagonal is zero.
struct EffectMatrix {
  std::vector<std::string> node_names;
  Eigen::MatrixXd total;

  double effect(std::string_view on, std::string_view of) const;
};

/// (I - B)^-1 - I, solved as a unit-triangular system in causal order.
EffectMatrix total_effects(const WeightedDag& dag);

/// Linear SEM readout of one node: mean + sum_j B(t, j) (x_j - mean_j), with
/// means taken from the dag's statistics (zero when it has none). `row` is
/// aligned with dag.node_names().
double predict_target_sem(const WeightedDag& dag, const Eigen::VectorXd& row, std::string_view target);

/// Row-wise prediction for every row of `table` (columns looked up by name).
Eigen::VectorXd predict_target_sem(const WeightedDag& dag, const FeatureTable& table, std::string_view target);

/// Counterfactual row after do(x_feature += delta): the feature and all of its
/// descendants shift by their total effect times delta, noise terms held fixed.
Eigen::VectorXd intervene_row(const EffectMatrix& effects, const Eigen::VectorXd& row, std::size_t feature,
                              double delta);

enum class GoalMode {
  exact,     // move the prediction onto the goal
  at_least,  // rows already at or above the goal get a zero-delta plan
};

struct InterventionOptions {
  double goal = 3.0;
  GoalMode mode = GoalMode::exact;
  /// Candidate features; empty means every non-target node.
  std::vector<std::string> interventable;
  /// Observed [min, max] per feature; intervened values are clamped into it.
  std::map<std::string, std::pair<double, double>> bounds;
};

struct InterventionPlan {
  std::string row_id;
  std::string feature;
  double original_value = 0.0;
  double intervened_value = 0.0;
  double predicted_before = 0.0;
  double predicted_after = 0.0;
  double goal = 0.0;
  double effect = 0.0;
  bool clamped = false;

  double delta() const { return intervened_value - original_value; }
};

/// Answers, for one row: which interventable feature has the largest
/// |total effect| on the target (ties by name), and what value of it moves the
/// predicted target onto the goal. Throws NoCausalLever when every candidate
/// effect is zero.
InterventionPlan optimal_individual_intervention(const EffectMatrix& effects, std::string_view row_id,
                                                 const Eigen::VectorXd& row, double predicted_before,
                                                 std::string_view target, const InterventionOptions& options);

/// Plans for every row of `table` against an original-scale SEM.
std::vector<InterventionPlan> plan_interventions(const WeightedDag& sem, const FeatureTable& table,
                                                 std::string_view target, const InterventionOptions& options,
                                                 std::size_t jobs = 1);

inline constexpr std::string_view kIntervenedSuffix = "__do";

std::string intervened_id(std::string_view row_id);

/// Intervened copies of the planned rows. The chosen feature moves by the
/// plan's delta; with `propagate`, descendants in the SEM (the target
/// included) move by effect * delta as well. Rows without a plan pass through
/// unchanged; planned rows get the intervened id suffix.
FeatureTable apply_interventions(const FeatureTable& table, std::span<const InterventionPlan> plans,
                                 const EffectMatrix& effects, bool propagate = true);

/// Per-column [min, max] for the named columns.
std::map<std::string, std::pair<double, double>> observed_bounds(const FeatureTable& table,
                                                                 std::span<const std::string> columns);

void save_plans(std::span<const InterventionPlan> plans, const std::filesystem::path& path);
std::vector<InterventionPlan> load_plans(const std::filesystem::path& path);
void save_effects(const EffectMatrix& effects, const std::filesystem::path& path);

}  // namespace causal_al
