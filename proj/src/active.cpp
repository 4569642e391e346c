#include "causal_al/active.hpp"

#include "causal_al/error.hpp"
#include "causal_al/parallel.hpp"
#include "causal_al/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace causal_al {

std::vector<double> ActiveLearningRun::loss_trajectory() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.loss);
  return out;
}

std::span<const std::string> ActiveLearningRun::snapshot(std::size_t iteration) const {
  if (iteration == 0 || iteration > records.size()) throw Error(ErrorKind::out_of_range, "no such iteration");
  return std::span<const std::string>(selected_row_ids).first(records[iteration - 1].dataset_size);
}

namespace {

std::vector<std::string> node_list(std::span<const std::string> features, std::string_view target) {
  std::vector<std::string> nodes;
  for (const auto& f : features) {
    if (f != target) nodes.push_back(f);
  }
  nodes.emplace_back(target);
  return nodes;
}

}  // namespace

ActiveLearningRun run_selection(SelectionRule rule, std::span<const FeatureTable> subsets,
                                const WeightedDag& global_graph, std::span<const std::string> features,
                                std::string_view target, const ActiveLearningParams& params) {
  const std::size_t m = params.samples_per_iteration;
  if (m == 0) throw Error(ErrorKind::invalid_argument, "samples per iteration must be positive");
  if (params.iterations == 0) throw Error(ErrorKind::invalid_argument, "iteration count must be positive");
  if (subsets.empty()) throw Error(ErrorKind::invalid_argument, "no data subsets");
  const std::size_t n_subsets = subsets.size();

  const std::vector<std::string> nodes = node_list(features, target);
  std::vector<Eigen::MatrixXd> values;
  std::vector<std::vector<std::size_t>> pools(n_subsets);
  for (std::size_t k = 0; k < n_subsets; ++k) {
    if (subsets[k].rows() < m * params.iterations) {
      throw Error(ErrorKind::insufficient_data, "subset " + std::to_string(k) + " has " +
                                                    std::to_string(subsets[k].rows()) + " rows, needs " +
                                                    std::to_string(m * params.iterations));
    }
    values.push_back(subsets[k].select_columns(nodes).values());
    pools[k].resize(subsets[k].rows());
    for (std::size_t i = 0; i < pools[k].size(); ++i) pools[k][i] = i;
  }

  ActiveLearningRun run;
  run.rule = rule;
  run.seed = params.seed;
  run.samples_per_iteration = m;
  run.iterations = params.iterations;
  run.n_subsets = n_subsets;

  const auto width = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd dal(0, width);
  const std::vector<std::string> targets{std::string(target)};

  for (std::size_t iter = 1; iter <= params.iterations; ++iter) {
    std::vector<std::vector<std::size_t>> samples(n_subsets);
    std::vector<double> losses(n_subsets, std::numeric_limits<double>::infinity());
    parallel_for(n_subsets, params.jobs, [&](std::size_t k) {
      Rng rng(derive_seed(params.seed, iter, k + 1));
      samples[k] = rng.sample(pools[k], m);
      const auto base = dal.rows();
      Eigen::MatrixXd cand(base + static_cast<Eigen::Index>(m), width);
      cand.topRows(base) = dal;
      std::vector<std::string> ids = run.selected_row_ids;
      for (std::size_t s = 0; s < m; ++s) {
        cand.row(base + static_cast<Eigen::Index>(s)) = values[k].row(static_cast<Eigen::Index>(samples[k][s]));
        ids.push_back(subsets[k].row_ids()[samples[k][s]]);
      }
      try {
        const FeatureTable table(std::move(ids), nodes, std::move(cand), targets);
        const WeightedDag g = discover_lingam(table, nodes, target, params.discovery);
        losses[k] = spectral_distance(g, global_graph, params.top_n, params.spectrum_mode);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::duplicate_row_id || e.kind() == ErrorKind::node_mismatch) throw;
      }
    });

    std::size_t chosen = 0;
    if (rule == SelectionRule::active) {
      for (std::size_t k = 1; k < n_subsets; ++k) {
        if (losses[k] < losses[chosen]) chosen = k;
      }
    } else {
      Rng rng(derive_seed(params.seed, iter, 0));
      chosen = static_cast<std::size_t>(rng.index(n_subsets));
    }

    const auto base = dal.rows();
    dal.conservativeResize(base + static_cast<Eigen::Index>(m), Eigen::NoChange);
    for (std::size_t s = 0; s < m; ++s) {
      dal.row(base + static_cast<Eigen::Index>(s)) =
          values[chosen].row(static_cast<Eigen::Index>(samples[chosen][s]));
      run.selected_row_ids.push_back(subsets[chosen].row_ids()[samples[chosen][s]]);
    }
    const std::set<std::size_t> taken(samples[chosen].begin(), samples[chosen].end());
    std::erase_if(pools[chosen], [&](std::size_t i) { return taken.contains(i); });

    run.records.push_back({iter, losses, chosen, losses[chosen], run.selected_row_ids.size()});
  }
  return run;
}

ActiveLearningRun active_learn(std::span<const FeatureTable> subsets, const WeightedDag& global_graph,
                               std::span<const std::string> features, std::string_view target,
                               const ActiveLearningParams& params) {
  return run_selection(SelectionRule::active, subsets, global_graph, features, target, params);
}

ActiveLearningRun random_baseline(std::span<const FeatureTable> subsets, const WeightedDag& global_graph,
                                  std::span<const std::string> features, std::string_view target,
                                  const ActiveLearningParams& params) {
  return run_selection(SelectionRule::random, subsets, global_graph, features, target, params);
}

LossSummary summarize_runs(std::span<const ActiveLearningRun> runs) {
  if (runs.empty()) throw Error(ErrorKind::invalid_argument, "no runs to summarize");
  const std::size_t n_iter = runs.front().records.size();
  for (const auto& r : runs) {
    if (r.records.size() != n_iter) throw Error(ErrorKind::invalid_argument, "runs differ in iteration count");
  }
  LossSummary out{std::vector<double>(n_iter, 0.0), std::vector<double>(n_iter, 0.0)};
  const auto n = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < n_iter; ++i) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r.records[i].loss;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.records[i].loss - mean) * (r.records[i].loss - mean);
    out.mean[i] = mean;
    out.stddev[i] = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return out;
}

std::string rule_name(SelectionRule rule) { return rule == SelectionRule::active ? "active" : "random"; }

SelectionRule parse_rule(std::string_view text) {
  if (text == "active") return SelectionRule::active;
  if (text == "random") return SelectionRule::random;
  throw Error(ErrorKind::invalid_argument, "unknown selection rule '" + std::string(text) + "'");
}

void save_run_records(const ActiveLearningRun& run, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "iter,subset";
  for (std::size_t k = 0; k < run.n_subsets; ++k) out << ",loss_" << k;
  out << ",chosen,size\n";
  for (const auto& r : run.records) {
    out << r.iteration << ',' << r.chosen;
    for (double l : r.losses) out << ',' << format_double(l);
    out << ',' << format_double(r.loss) << ',' << r.dataset_size << '\n';
  }
}

std::vector<IterationRecord> load_run_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const std::size_t n_fields = split_csv_line(trim(line)).size();
  if (n_fields < 5) throw Error(ErrorKind::bad_format, path.string() + ": not a run record file");
  std::vector<IterationRecord> records;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(trim(line));
    if (f.size() != n_fields) throw Error(ErrorKind::bad_format, path.string() + ": ragged run record");
    try {
      IterationRecord r;
      r.iteration = std::stoul(f[0]);
      r.chosen = std::stoul(f[1]);
      for (std::size_t i = 2; i + 2 < f.size(); ++i) r.losses.push_back(std::stod(f[i]));
      r.loss = std::stod(f[f.size() - 2]);
      r.dataset_size = std::stoul(f.back());
      records.push_back(std::move(r));
    } catch (const std::exception&) {
      throw Error(ErrorKind::bad_format, path.string() + ": non-numeric run record field");
    }
  }
  return records;
}

void save_id_list(std::span<const std::string> ids, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

std::vector<std::string> load_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) ids.push_back(std::move(t));
  }
  return ids;
}

void save_loss_summary(const LossSummary& active, const LossSummary* random, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "iter,active_mean,active_std";
  if (random) out << ",random_mean,random_std";
  out << '\n';
  for (std::size_t i = 0; i < active.mean.size(); ++i) {
    out << i + 1 << ',' << format_double(active.mean[i]) << ',' << format_double(active.stddev[i]);
    if (random) out << ',' << format_double(random->mean[i]) << ',' << format_double(random->stddev[i]);
    out << '\n';
  }
}

}  // namespace causal_al
