#include "causal_al/intervene.hpp"

#include "causal_al/error.hpp"
#include "causal_al/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace causal_al {

double EffectMatrix::effect(std::string_view on, std::string_view of) const {
  auto index = [&](std::string_view n) {
    const auto it = std::find(node_names.begin(), node_names.end(), n);
    if (it == node_names.end()) throw Error(ErrorKind::unknown_node, std::string(n));
    return static_cast<Eigen::Index>(it - node_names.begin());
  };
  return total(index(on), index(of));
}

EffectMatrix total_effects(const WeightedDag& dag) {
  const auto d = static_cast<Eigen::Index>(dag.size());
  const auto& order = dag.causal_order();
  // Permute into causal order, where B is strictly lower triangular.
  Eigen::MatrixXd lower(d, d);
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index q = 0; q < d; ++q) {
      lower(p, q) = dag.weights()(static_cast<Eigen::Index>(order[static_cast<std::size_t>(p)]),
                                  static_cast<Eigen::Index>(order[static_cast<std::size_t>(q)]));
    }
  }
  if (!lower.triangularView<Eigen::Upper>().toDenseMatrix().isZero(0.0)) {
    throw Error(ErrorKind::not_acyclic, "weights are not triangular under the causal order");
  }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd i_minus_b = identity - lower;
  const Eigen::MatrixXd inverse = i_minus_b.triangularView<Eigen::UnitLower>().solve(identity);

  EffectMatrix out{dag.node_names(), Eigen::MatrixXd::Zero(d, d)};
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index q = 0; q < d; ++q) {
      if (p == q) continue;
      out.total(static_cast<Eigen::Index>(order[static_cast<std::size_t>(p)]),
                static_cast<Eigen::Index>(order[static_cast<std::size_t>(q)])) = inverse(p, q);
    }
  }
  return out;
}

double predict_target_sem(const WeightedDag& dag, const Eigen::VectorXd& row, std::string_view target) {
  const auto t = static_cast<Eigen::Index>(dag.index_of(target));
  if (row.size() != static_cast<Eigen::Index>(dag.size())) {
    throw Error(ErrorKind::column_mismatch, "row length does not match dag nodes");
  }
  const Eigen::VectorXd mean =
      dag.stats() ? dag.stats()->mean : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dag.size()));
  return mean(t) + dag.weights().row(t).dot(row - mean);
}

Eigen::VectorXd predict_target_sem(const WeightedDag& dag, const FeatureTable& table, std::string_view target) {
  const Eigen::MatrixXd x = table.select_columns(dag.node_names()).values();
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_target_sem(dag, x.row(i).transpose(), target);
  return out;
}

Eigen::VectorXd intervene_row(const EffectMatrix& effects, const Eigen::VectorXd& row, std::size_t feature,
                              double delta) {
  const auto f = static_cast<Eigen::Index>(feature);
  Eigen::VectorXd out = row + delta * effects.total.col(f);
  out(f) = row(f) + delta;
  return out;
}

InterventionPlan optimal_individual_intervention(const EffectMatrix& effects, std::string_view row_id,
                                                 const Eigen::VectorXd& row, double predicted_before,
                                                 std::string_view target, const InterventionOptions& options) {
  const auto& names = effects.node_names;
  const auto t_it = std::find(names.begin(), names.end(), target);
  if (t_it == names.end()) throw Error(ErrorKind::unknown_node, "target " + std::string(target));
  const auto t = static_cast<Eigen::Index>(t_it - names.begin());

  std::vector<std::string> candidates = options.interventable;
  if (candidates.empty()) {
    for (const auto& n : names) {
      if (n != target) candidates.push_back(n);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::optional<Eigen::Index> best;
  double best_abs = 0.0;
  for (const auto& c : candidates) {
    if (c == target) continue;
    const auto it = std::find(names.begin(), names.end(), c);
    if (it == names.end()) throw Error(ErrorKind::unknown_node, "interventable feature " + c);
    const auto j = static_cast<Eigen::Index>(it - names.begin());
    const double mag = std::abs(effects.total(t, j));
    if (mag > best_abs) {
      best_abs = mag;
      best = j;
    }
  }
  if (!best) throw Error(ErrorKind::no_causal_lever, "no interventable feature reaches " + std::string(target));

  InterventionPlan plan;
  plan.row_id = std::string(row_id);
  plan.feature = names[static_cast<std::size_t>(*best)];
  plan.effect = effects.total(t, *best);
  plan.original_value = row(*best);
  plan.predicted_before = predicted_before;
  plan.goal = options.goal;

  double delta = 0.0;
  const bool met = options.mode == GoalMode::at_least ? predicted_before >= options.goal
                                                      : predicted_before == options.goal;
  if (!met) delta = (options.goal - predicted_before) / plan.effect;

  double value = plan.original_value + delta;
  if (const auto b = options.bounds.find(plan.feature); b != options.bounds.end()) {
    const double clamped = std::clamp(value, b->second.first, b->second.second);
    plan.clamped = clamped != value;
    value = clamped;
  }
  plan.intervened_value = value;
  plan.predicted_after = predicted_before + plan.effect * plan.delta();
  return plan;
}

std::vector<InterventionPlan> plan_interventions(const WeightedDag& sem, const FeatureTable& table,
                                                 std::string_view target, const InterventionOptions& options,
                                                 std::size_t jobs) {
  const EffectMatrix effects = total_effects(sem);
  const Eigen::MatrixXd x = table.select_columns(sem.node_names()).values();
  std::vector<InterventionPlan> plans(table.rows());
  parallel_for(table.rows(), jobs, [&](std::size_t i) {
    const Eigen::VectorXd row = x.row(static_cast<Eigen::Index>(i)).transpose();
    plans[i] = optimal_individual_intervention(effects, table.row_ids()[i], row, predict_target_sem(sem, row, target),
                                               target, options);
  });
  return plans;
}

std::string intervened_id(std::string_view row_id) { return std::string(row_id) + std::string(kIntervenedSuffix); }

FeatureTable apply_interventions(const FeatureTable& table, std::span<const InterventionPlan> plans,
                                 const EffectMatrix& effects, bool propagate) {
  Eigen::MatrixXd values = table.values();
  std::vector<std::string> ids = table.row_ids();
  std::set<std::size_t> planned;
  for (const auto& plan : plans) {
    const auto row = table.find_row(plan.row_id);
    if (!row) throw Error(ErrorKind::unknown_row, "plan references unknown row " + plan.row_id);
    if (!planned.insert(*row).second) throw Error(ErrorKind::invalid_argument, "two plans for row " + plan.row_id);
    const auto r = static_cast<Eigen::Index>(*row);
    const double delta = plan.delta();
    values(r, static_cast<Eigen::Index>(table.column_index(plan.feature))) += delta;
    if (propagate) {
      const auto f_it = std::find(effects.node_names.begin(), effects.node_names.end(), plan.feature);
      if (f_it == effects.node_names.end()) throw Error(ErrorKind::unknown_node, plan.feature);
      const auto f = static_cast<Eigen::Index>(f_it - effects.node_names.begin());
      for (std::size_t m = 0; m < effects.node_names.size(); ++m) {
        const double e = effects.total(static_cast<Eigen::Index>(m), f);
        if (e == 0.0 || static_cast<Eigen::Index>(m) == f || !table.has_column(effects.node_names[m])) continue;
        values(r, static_cast<Eigen::Index>(table.column_index(effects.node_names[m]))) += e * delta;
      }
    }
    ids[*row] = intervened_id(plan.row_id);
  }
  return FeatureTable(std::move(ids), table.feature_names(), std::move(values), table.target_names());
}

std::map<std::string, std::pair<double, double>> observed_bounds(const FeatureTable& table,
                                                                 std::span<const std::string> columns) {
  std::map<std::string, std::pair<double, double>> out;
  for (const auto& c : columns) {
    const Eigen::VectorXd col = table.column(c);
    out[c] = {col.minCoeff(), col.maxCoeff()};
  }
  return out;
}

void save_plans(std::span<const InterventionPlan> plans, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "id,feature,old,new,pred_before,pred_after,clamped\n";
  for (const auto& p : plans) {
    out << p.row_id << ',' << p.feature << ',' << format_double(p.original_value) << ','
        << format_double(p.intervened_value) << ',' << format_double(p.predicted_before) << ','
        << format_double(p.predicted_after) << ',' << (p.clamped ? 1 : 0) << '\n';
  }
}

std::vector<InterventionPlan> load_plans(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<InterventionPlan> plans;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw Error(ErrorKind::bad_format, path.string() + ": plan rows need 7 fields");
    InterventionPlan p;
    p.row_id = f[0];
    p.feature = f[1];
    try {
      p.original_value = std::stod(f[2]);
      p.intervened_value = std::stod(f[3]);
      p.predicted_before = std::stod(f[4]);
      p.predicted_after = std::stod(f[5]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::bad_format, path.string() + ": non-numeric plan field");
    }
    p.clamped = f[6] == "1";
    plans.push_back(std::move(p));
  }
  return plans;
}

void save_effects(const EffectMatrix& effects, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "on";
  for (const auto& n : effects.node_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < effects.node_names.size(); ++i) {
    out << effects.node_names[i];
    for (std::size_t j = 0; j < effects.node_names.size(); ++j) {
      out << ',' << format_double(effects.total(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

}  // namespace causal_al
