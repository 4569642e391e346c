#include "causal_al/pipeline.hpp"

#include "causal_al/active.hpp"
#include "causal_al/causal.hpp"
#include "causal_al/cluster.hpp"
#include "causal_al/error.hpp"
#include "causal_al/graphdist.hpp"
#include "causal_al/intervene.hpp"
#include "causal_al/match.hpp"
#include "causal_al/regress.hpp"
#include "causal_al/rng.hpp"
#include "causal_al/synth.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace causal_al {

namespace {

struct KeyDefault {
  const char* key;
  const char* value;
  const char* comment;  // printed before the key in the default config, when non-empty
};

const std::vector<KeyDefault>& key_defaults() {
  static const std::vector<KeyDefault> keys = {
      {"out_dir", "out", "paths"},
      {"features", "", ""},
      {"fingerprints", "", ""},
      {"reference", "", "defaults to features"},
      {"reference_fingerprints", "", "defaults to fingerprints when reference is unset"},
      {"id_column", "id", "schema"},
      {"target_columns", "", "defaults to target"},
      {"fingerprint_width", "2048", ""},
      {"target", "dipole", ""},
      {"seed", "0", "seeds; a stage seed left empty is derived from the master seed"},
      {"synth_seed", "", ""},
      {"cluster_seed", "", ""},
      {"split_seed", "", ""},
      {"active_seed", "", ""},
      {"forest_seed", "", ""},
      {"pivots", "MolLogP,TPSA,MolMR", "cluster"},
      {"n_components", "3", ""},
      {"gmm_max_iter", "500", ""},
      {"gmm_tol", "1e-6", ""},
      {"discover_nodes", "", "discover; empty means every non-target column plus the target"},
      {"prune_threshold", "0.05", ""},
      {"k_features", "9", "select-features"},
      {"strength", "total", "total | direct"},
      {"global_graph", "", "active-learn; empty means discover it from the full table"},
      {"samples_per_iteration", "50", ""},
      {"iterations", "20", ""},
      {"runs", "10", ""},
      {"baseline", "true", ""},
      {"spectrum", "singular", "singular | eigen"},
      {"top_n", "0", "0 means the size of the node union"},
      {"train_fraction", "0.8", ""},
      {"track_accuracy", "true", ""},
      {"n_trees", "100", ""},
      {"max_depth", "12", ""},
      {"min_leaf", "2", ""},
      {"goal", "3.0", "intervene"},
      {"goal_mode", "at_least", "at_least | exact"},
      {"clamp", "false", "clamp intervened values to the observed range"},
      {"intervene_on", "selected", "selected | all"},
      {"knn_k", "1", "match"},
      {"pooled_normalization", "false", ""},
      {"match_features", "all", "all | selected"},
      {"threshold", "3.0", "report"},
      {"bin_width", "0.5", ""},
      {"pca_source", "features", "features | fingerprints | none"},
      {"synth_world", "descriptor", "synth: descriptor | benchmark | spec"},
      {"synth_spec", "", ""},
      {"synth_rows", "5000", ""},
      {"dag_a", "", "graph-dist"},
      {"dag_b", "", ""},
  };
  return keys;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

class Manifest {
 public:
  Manifest(std::string stage, const PipelineConfig& config) : stage_(std::move(stage)), config_(config) {}

  void seed(std::uint64_t s) { seed_ = s; }
  void input(const std::filesystem::path& path) { inputs_.emplace_back(path.generic_string(), fnv1a_file(path)); }
  void param(const std::string& key) { params_.emplace_back(key, config_.get(key)); }
  void note(const std::string& key, const std::string& value) { params_.emplace_back(key, value); }

  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "manifest.txt", std::ios::binary);
    if (!out) throw Error(ErrorKind::missing_file, "cannot write " + (dir / "manifest.txt").string());
    out << "stage = " << stage_ << '\n';
    if (seed_) out << "seed = " << *seed_ << '\n';
    for (const auto& [path, hash] : inputs_) out << "input " << path << " = fnv1a:" << hex64(hash) << '\n';
    for (const auto& [k, v] : params_) out << "param " << k << " = " << v << '\n';
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    out << "duration_seconds = " << std::fixed << std::setprecision(3) << elapsed << '\n';
    out << "timestamp = " << utc_timestamp() << '\n';
  }

 private:
  std::string stage_;
  const PipelineConfig& config_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::pair<std::string, std::uint64_t>> inputs_;
  std::vector<std::pair<std::string, std::string>> params_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

FeatureTable load_table(const std::filesystem::path& path, const PipelineConfig& config, Manifest& manifest) {
  manifest.input(path);
  auto loaded = load_feature_table(path, config.schema());
  if (loaded.report.rows_dropped > 0) {
    manifest.note("rows_dropped " + path.generic_string(), std::to_string(loaded.report.rows_dropped));
  }
  return std::move(loaded.table);
}

std::filesystem::path required_path(const PipelineConfig& config, std::string_view key) {
  if (!config.is_set(key)) throw Error(ErrorKind::invalid_argument, "config key '" + std::string(key) + "' is not set");
  return config.get(key);
}

FeatureTable load_features(const PipelineConfig& config, Manifest& manifest) {
  return load_table(required_path(config, "features"), config, manifest);
}

std::vector<std::string> load_selected(const PipelineConfig& config, Manifest& manifest) {
  const auto path = config.out_dir() / "select" / "features.txt";
  manifest.input(path);
  return load_id_list(path);
}

void write_lines(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << text;
}

SpectrumMode spectrum_mode(const PipelineConfig& config) {
  return config.get("spectrum") == "eigen" ? SpectrumMode::eigenvalue_magnitudes : SpectrumMode::singular_values;
}

std::optional<std::size_t> top_n(const PipelineConfig& config) {
  const auto n = config.get_size("top_n");
  return n == 0 ? std::nullopt : std::optional<std::size_t>(n);
}

ForestParams forest_params(const PipelineConfig& config, std::size_t jobs) {
  return {config.get_size("n_trees"), config.get_size("max_depth"), config.get_size("min_leaf"),
          config.stage_seed("forest"), jobs};
}

// ---------------------------------------------------------------------------

void cmd_synth(const PipelineConfig& config) {
  Manifest m("synth", config);
  const auto dir = config.out_dir() / "synth";
  const std::uint64_t seed = config.stage_seed("synth");
  m.seed(seed);
  m.param("synth_world");
  const std::string world_kind = config.get("synth_world");
  const std::string id_col = config.get("id_column");

  SemSpec spec;
  std::optional<WorldOptions> options;
  if (world_kind == "descriptor") {
    auto w = descriptor_world(seed);
    spec = std::move(w.spec);
    options = std::move(w.options);
  } else if (world_kind == "benchmark") {
    spec = benchmark_sem();
    options = benchmark_world_options(seed);
  } else if (world_kind == "spec") {
    const auto path = required_path(config, "synth_spec");
    m.input(path);
    spec = load_sem_spec(path);
    spec.seed = seed;
    m.param("synth_rows");
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown synth_world '" + world_kind + "'");
  }
  write_lines(dir / "spec.txt", format_sem_spec(spec));

  std::vector<std::string> descriptors;
  for (const auto& n : spec.nodes) {
    if (std::find(spec.targets.begin(), spec.targets.end(), n) == spec.targets.end()) descriptors.push_back(n);
  }
  const std::size_t width = config.get_size("fingerprint_width");
  const std::uint64_t fp_seed = derive_seed(seed, 3);
  std::string schema = "id_column = " + id_col + "\ntarget_columns = ";
  for (std::size_t i = 0; i < spec.targets.size(); ++i) schema += (i ? "," : "") + spec.targets[i];
  schema += "\nfingerprint_width = " + std::to_string(width) + "\n";
  write_lines(dir / "schema.txt", schema);

  if (!options) {
    const FeatureTable table = sample_sem(spec, config.get_size("synth_rows"), "r");
    save_feature_table(table, dir / "features.csv", id_col);
    save_fingerprints(synth_fingerprints(table, descriptors, width, fp_seed), dir / "fingerprints.csv");
    m.write(dir);
    return;
  }
  const HeterogeneousWorld world = make_heterogeneous_world(spec, *options);
  const FeatureTable pooled = FeatureTable::concat(world.subsets);
  save_feature_table(pooled, dir / "features.csv", id_col);
  save_feature_table(world.global, dir / "reference.csv", id_col);
  save_fingerprints(synth_fingerprints(pooled, descriptors, width, fp_seed), dir / "fingerprints.csv");
  save_fingerprints(synth_fingerprints(world.global, descriptors, width, fp_seed),
                    dir / "reference_fingerprints.csv");
  save_dag(world.true_global, dir / "true_dag.txt");
  SubsetLabels truth;
  for (std::size_t k = 0; k < world.subsets.size(); ++k) {
    for (const auto& id : world.subsets[k].row_ids()) {
      truth.row_ids.push_back(id);
      truth.labels.push_back(k);
    }
  }
  save_subset_labels(truth, dir / "subset_truth.csv");
  m.note("n_subsets", std::to_string(options->n_subsets));
  m.note("matching_subset", std::to_string(options->matching_subset));
  m.write(dir);
}

void cmd_cluster(const PipelineConfig& config) {
  Manifest m("cluster", config);
  const auto dir = config.out_dir() / "cluster";
  const FeatureTable table = load_features(config, m);
  GmmOptions o;
  o.n_components = config.get_size("n_components");
  o.seed = config.stage_seed("cluster");
  o.max_iter = config.get_size("gmm_max_iter");
  o.tol = config.get_double("gmm_tol");
  m.seed(o.seed);
  for (const char* k : {"pivots", "n_components", "gmm_max_iter", "gmm_tol"}) m.param(k);

  const auto pivots = config.get_list("pivots");
  const GmmModel model = fit_gmm(table, pivots, o);
  save_gmm(model, dir / "gmm.txt");
  save_subset_labels({table.row_ids(), assign_subsets(model, table)}, dir / "labels.csv");

  std::ostringstream means;
  means << "component,weight";
  for (const auto& p : pivots) means << ',' << p;
  means << '\n';
  const Eigen::MatrixXd mu = model.original_means();
  for (Eigen::Index k = 0; k < mu.rows(); ++k) {
    means << k << ',' << format_double(model.weights(k));
    for (Eigen::Index j = 0; j < mu.cols(); ++j) means << ',' << format_double(mu(k, j));
    means << '\n';
  }
  write_lines(dir / "means.csv", means.str());
  std::ostringstream ll;
  ll << "iter,mean_log_likelihood\n";
  for (std::size_t i = 0; i < model.log_likelihood_trace.size(); ++i) {
    ll << i << ',' << format_double(model.log_likelihood_trace[i]) << '\n';
  }
  write_lines(dir / "loglik.csv", ll.str());
  m.note("converged", model.converged ? "true" : "false");
  m.write(dir);
}

void cmd_discover(const PipelineConfig& config) {
  Manifest m("discover", config);
  const auto dir = config.out_dir() / "discover";
  const FeatureTable table = load_features(config, m);
  const std::string target = config.get("target");
  for (const char* k : {"target", "discover_nodes", "prune_threshold"}) m.param(k);

  std::vector<std::string> nodes = config.get_list("discover_nodes");
  if (nodes.empty()) nodes = table.descriptor_names();
  std::erase(nodes, target);
  nodes.push_back(target);
  DiscoveryOptions opts;
  opts.prune_threshold = config.get_double("prune_threshold");
  const WeightedDag dag = discover_lingam(table, nodes, target, opts);
  save_dag(dag, dir / "global_dag.txt");
  save_adjacency_csv(dag, dir / "adjacency.csv");
  const WeightedDag sem = fit_sem_weights(table, dag);
  save_dag(sem, dir / "sem.txt");
  save_effects(total_effects(sem), dir / "effects.csv");
  m.write(dir);
}

void cmd_select_features(const PipelineConfig& config) {
  Manifest m("select-features", config);
  const auto dir = config.out_dir() / "select";
  const auto dag_path = config.out_dir() / "discover" / "global_dag.txt";
  m.input(dag_path);
  for (const char* k : {"target", "k_features", "strength"}) m.param(k);
  const WeightedDag dag = load_dag(dag_path);
  const std::string strength = config.get("strength");
  const FeatureRanking ranking =
      rank_features(dag, config.get("target"),
                    strength == "direct" ? StrengthMode::direct_weight : StrengthMode::total_effect);
  std::ostringstream out;
  out << "feature,strength\n";
  for (const auto& r : ranking) out << r.name << ',' << format_double(r.strength) << '\n';
  write_lines(dir / "ranking.csv", out.str());
  save_id_list(select_top_k(ranking, config.get_size("k_features")), dir / "features.txt");
  m.write(dir);
}

void cmd_active_learn(const PipelineConfig& config, std::size_t jobs) {
  Manifest m("active-learn", config);
  const auto dir = config.out_dir() / "active";
  const FeatureTable table = load_features(config, m);
  const auto labels_path = config.out_dir() / "cluster" / "labels.csv";
  m.input(labels_path);
  const SubsetLabels labels = load_subset_labels(labels_path);
  const std::vector<std::string> selected = load_selected(config, m);
  const std::string target = config.get("target");
  const std::uint64_t seed = config.stage_seed("active");
  m.seed(seed);
  for (const char* k : {"target", "n_components", "samples_per_iteration", "iterations", "runs", "baseline",
                        "spectrum", "top_n", "prune_threshold", "train_fraction", "track_accuracy"}) {
    m.param(k);
  }

  const TrainTestSplit split = split_rows(table, config.get_double("train_fraction"), config.stage_seed("split"));
  const std::size_t n_subsets = config.get_size("n_components");
  const std::vector<FeatureTable> subsets = partition_by_labels(split.train, labels, n_subsets);

  std::vector<std::string> nodes = selected;
  std::erase(nodes, target);
  nodes.push_back(target);
  DiscoveryOptions dopts;
  dopts.prune_threshold = config.get_double("prune_threshold");
  WeightedDag global;
  if (config.is_set("global_graph")) {
    m.input(config.get("global_graph"));
    global = load_dag(config.get("global_graph"));
  } else {
    global = discover_lingam(table, nodes, target, dopts);
  }
  save_dag(global, dir / "global_dag.txt");

  ActiveLearningParams params;
  params.samples_per_iteration = config.get_size("samples_per_iteration");
  params.iterations = config.get_size("iterations");
  params.jobs = jobs;
  params.discovery = dopts;
  params.top_n = top_n(config);
  params.spectrum_mode = spectrum_mode(config);

  const bool baseline = config.get_bool("baseline");
  const bool track = config.get_bool("track_accuracy");
  const ForestParams fparams = forest_params(config, jobs);
  if (track) {
    for (const char* k : {"n_trees", "max_depth", "min_leaf"}) m.param(k);
  }
  std::vector<ActiveLearningRun> active_runs;
  std::vector<ActiveLearningRun> random_runs;
  std::vector<std::vector<double>> active_r2;
  std::vector<std::vector<double>> random_r2;
  std::optional<double> reference_r2;
  const std::size_t n_runs = config.get_size("runs");
  for (std::size_t r = 0; r < n_runs; ++r) {
    params.seed = derive_seed(seed, r);
    std::vector<SelectionRule> rules{SelectionRule::active};
    if (baseline) rules.push_back(SelectionRule::random);
    for (auto rule : rules) {
      ActiveLearningRun run = run_selection(rule, subsets, global, selected, target, params);
      const std::string stem = "run_" + std::to_string(r) + "_" + rule_name(rule);
      save_run_records(run, dir / (stem + ".csv"));
      save_id_list(run.selected_row_ids, dir / (stem + "_ids.txt"));
      if (track) {
        const AccuracyTrace trace = accuracy_trace(run, split.train, split.test, selected, target, fparams);
        reference_r2 = trace.reference;
        (rule == SelectionRule::active ? active_r2 : random_r2).push_back(trace.r2);
      }
      (rule == SelectionRule::active ? active_runs : random_runs).push_back(std::move(run));
    }
  }

  const LossSummary active_summary = summarize_runs(active_runs);
  std::optional<LossSummary> random_summary;
  if (baseline) random_summary = summarize_runs(random_runs);
  save_loss_summary(active_summary, random_summary ? &*random_summary : nullptr, dir / "loss_summary.csv");

  std::ostringstream counts;
  counts << "subset,active" << (baseline ? ",random" : "") << '\n';
  for (std::size_t k = 0; k < n_subsets; ++k) {
    auto count = [&](const std::vector<ActiveLearningRun>& runs) {
      std::size_t c = 0;
      for (const auto& run : runs) {
        for (const auto& rec : run.records) c += rec.chosen == k ? 1 : 0;
      }
      return c;
    };
    counts << k << ',' << count(active_runs);
    if (baseline) counts << ',' << count(random_runs);
    counts << '\n';
  }
  write_lines(dir / "selection_counts.csv", counts.str());

  if (track) {
    auto mean_at = [](const std::vector<std::vector<double>>& traces, std::size_t i) {
      double s = 0.0;
      for (const auto& t : traces) s += t[i];
      return s / static_cast<double>(traces.size());
    };
    std::ostringstream acc;
    acc << "iter,active_r2" << (baseline ? ",random_r2" : "") << ",reference_r2\n";
    for (std::size_t i = 0; i < params.iterations; ++i) {
      acc << i + 1 << ',' << format_double(mean_at(active_r2, i));
      if (baseline) acc << ',' << format_double(mean_at(random_r2, i));
      acc << ',' << format_double(*reference_r2) << '\n';
    }
    write_lines(dir / "accuracy.csv", acc.str());
    const ForestModel full = fit_forest(split.train, selected, target, fparams);
    save_parity(split.test.column(target), full.predict(split.test), dir / "parity.csv");
  }
  m.write(dir);
}

void cmd_intervene(const PipelineConfig& config, std::size_t jobs) {
  Manifest m("intervene", config);
  const auto dir = config.out_dir() / "intervene";
  const FeatureTable table = load_features(config, m);
  const auto sem_path = config.out_dir() / "discover" / "sem.txt";
  m.input(sem_path);
  const WeightedDag sem = load_dag(sem_path);
  const std::string target = config.get("target");
  for (const char* k : {"target", "goal", "goal_mode", "clamp", "intervene_on"}) m.param(k);

  InterventionOptions options;
  options.goal = config.get_double("goal");
  options.mode = config.get("goal_mode") == "exact" ? GoalMode::exact : GoalMode::at_least;
  if (config.get("intervene_on") == "selected") options.interventable = load_selected(config, m);
  if (config.get_bool("clamp")) {
    std::vector<std::string> columns = options.interventable;
    if (columns.empty()) {
      for (const auto& n : sem.node_names()) {
        if (n != target) columns.push_back(n);
      }
    }
    options.bounds = observed_bounds(table, columns);
  }
  const std::vector<InterventionPlan> plans = plan_interventions(sem, table, target, options, jobs);
  const EffectMatrix effects = total_effects(sem);
  save_plans(plans, dir / "plans.csv");
  save_feature_table(apply_interventions(table, plans, effects, true), dir / "intervened.csv",
                     config.get("id_column"));
  save_effects(effects, dir / "effects.csv");
  m.write(dir);
}

void cmd_match(const PipelineConfig& config, std::size_t jobs) {
  Manifest m("match", config);
  const auto dir = config.out_dir() / "match";
  const FeatureTable queries = load_table(config.out_dir() / "intervene" / "intervened.csv", config, m);
  const FeatureTable reference = load_table(
      config.is_set("reference") ? std::filesystem::path(config.get("reference")) : required_path(config, "features"),
      config, m);
  for (const char* k : {"target", "knn_k", "pooled_normalization", "match_features"}) m.param(k);

  MatchOptions options;
  options.k = config.get_size("knn_k");
  options.pooled = config.get_bool("pooled_normalization");
  options.target_column = config.get("target");
  options.jobs = jobs;
  if (config.get("match_features") == "selected") options.features = load_selected(config, m);
  save_neighbors(nearest_in_reference(queries, reference, options), dir / "neighbors.csv", options.target_column);
  m.write(dir);
}

void cmd_report(const PipelineConfig& config) {
  Manifest m("report", config);
  const auto dir = config.out_dir() / "report";
  const FeatureTable original = load_features(config, m);
  const auto plans_path = config.out_dir() / "intervene" / "plans.csv";
  const auto neighbors_path = config.out_dir() / "match" / "neighbors.csv";
  m.input(plans_path);
  m.input(neighbors_path);
  const auto plans = load_plans(plans_path);
  const auto neighbors = load_neighbors(neighbors_path);
  for (const char* k : {"target", "threshold", "bin_width", "pca_source"}) m.param(k);

  const std::size_t width = config.get_size("fingerprint_width");
  std::optional<FingerprintTable> query_fps;
  std::optional<FingerprintTable> ref_fps;
  if (config.is_set("fingerprints")) {
    m.input(config.get("fingerprints"));
    query_fps = load_fingerprints(config.get("fingerprints"), width);
    check_fingerprints_align(*query_fps, original);
  }
  if (config.is_set("reference_fingerprints")) {
    m.input(config.get("reference_fingerprints"));
    ref_fps = load_fingerprints(config.get("reference_fingerprints"), width);
  } else if (!config.is_set("reference")) {
    ref_fps = query_fps;
  }

  ReportOptions options;
  options.threshold = config.get_double("threshold");
  options.bin_width = config.get_double("bin_width");
  options.target_column = config.get("target");
  const InterventionReport report = intervention_report(original, plans, neighbors, query_fps ? &*query_fps : nullptr,
                                                        ref_fps ? &*ref_fps : nullptr, options);
  save_report(report, dir);

  const std::string pca_source = config.get("pca_source");
  if (pca_source != "none" && !report.similarity.empty()) {
    std::vector<std::string> ids;
    std::vector<std::string> groups;
    for (const auto& p : report.similarity) {
      ids.push_back(p.query_id);
      groups.emplace_back("original");
    }
    for (const auto& p : report.similarity) {
      ids.push_back(p.ref_id);
      groups.emplace_back("matched");
    }
    const std::size_t n = report.similarity.size();
    Eigen::MatrixXd data;
    if (pca_source == "fingerprints") {
      if (!query_fps || !ref_fps) throw Error(ErrorKind::invalid_argument, "pca_source = fingerprints needs fingerprints");
      data.resize(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(width));
      for (std::size_t i = 0; i < 2 * n; ++i) {
        const FingerprintTable& fps = i < n ? *query_fps : *ref_fps;
        const auto row = fps.find_row(ids[i]);
        if (!row) throw Error(ErrorKind::unknown_row, "no fingerprint for " + ids[i]);
        for (std::size_t b = 0; b < width; ++b) {
          data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = fps.bits[*row].test(b) ? 1.0 : 0.0;
        }
      }
    } else {
      const FeatureTable reference =
          config.is_set("reference") ? load_table(config.get("reference"), config, m) : original;
      std::vector<std::string> columns;
      for (const auto& c : original.descriptor_names()) {
        if (reference.has_column(c) && !reference.is_target(c)) columns.push_back(c);
      }
      const Eigen::MatrixXd a = original.select_columns(columns).values();
      const Eigen::MatrixXd b = reference.select_columns(columns).values();
      data.resize(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(columns.size()));
      for (std::size_t i = 0; i < 2 * n; ++i) {
        const auto row = i < n ? original.find_row(ids[i]) : reference.find_row(ids[i]);
        if (!row) throw Error(ErrorKind::unknown_row, "no descriptors for " + ids[i]);
        data.row(static_cast<Eigen::Index>(i)) = (i < n ? a : b).row(static_cast<Eigen::Index>(*row));
      }
    }
    save_pca(pca_project(data, 2), ids, groups, dir / "pca.csv");
  }
  m.write(dir);
}

void cmd_graph_dist(const PipelineConfig& config) {
  Manifest m("graph-dist", config);
  const auto dir = config.out_dir() / "graph_dist";
  const auto a_path = required_path(config, "dag_a");
  const auto b_path = required_path(config, "dag_b");
  m.input(a_path);
  m.input(b_path);
  for (const char* k : {"top_n", "spectrum"}) m.param(k);
  const double d = spectral_distance(load_dag(a_path), load_dag(b_path), top_n(config), spectrum_mode(config));
  write_lines(dir / "distance.txt", "distance = " + format_double(d) + "\n");
  m.write(dir);
}

}  // namespace

// ---------------------------------------------------------------------------

PipelineConfig::PipelineConfig() {
  for (const auto& k : key_defaults()) values_[k.key] = k.value;
}

PipelineConfig PipelineConfig::parse(std::string_view text) {
  PipelineConfig config;
  for (auto& [k, v] : parse_key_values(text)) config.set(k, v);
  return config;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  PipelineConfig config;
  for (auto& [k, v] : read_key_values(path)) config.set(k, v);
  return config;
}

void PipelineConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorKind::invalid_argument, "expected key=value, got '" + std::string(assignment) + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void PipelineConfig::set(const std::string& key, std::string value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorKind::invalid_argument, "unknown config key '" + key + "'");
  it->second = std::move(value);
}

const std::string& PipelineConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorKind::invalid_argument, "unknown config key '" + std::string(key) + "'");
  return it->second;
}

bool PipelineConfig::is_set(std::string_view key) const { return !get(key).empty(); }

double PipelineConfig::get_double(std::string_view key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw Error(ErrorKind::invalid_argument, std::string(key) + " must be a finite number, got '" + v + "'");
  }
  return out;
}

std::uint64_t PipelineConfig::get_u64(std::string_view key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorKind::invalid_argument, std::string(key) + " must be a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::size_t PipelineConfig::get_size(std::string_view key) const { return static_cast<std::size_t>(get_u64(key)); }

bool PipelineConfig::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::invalid_argument, std::string(key) + " must be true or false, got '" + v + "'");
}

std::vector<std::string> PipelineConfig::get_list(std::string_view key) const { return split_list(get(key)); }

std::uint64_t PipelineConfig::stage_seed(std::string_view name) const {
  const std::string key = std::string(name) + "_seed";
  if (is_set(key)) return get_u64(key);
  return derive_seed(seed(), fnv1a(name));
}

Schema PipelineConfig::schema() const {
  Schema s;
  s.id_column = get("id_column");
  s.target_columns = get_list("target_columns");
  if (s.target_columns.empty()) s.target_columns = {get("target")};
  s.fingerprint_width = get_size("fingerprint_width");
  return s;
}

void PipelineConfig::validate() const {
  auto positive = [&](const char* key) {
    if (get_size(key) == 0) throw Error(ErrorKind::out_of_range, std::string(key) + " must be positive");
  };
  for (const char* k : {"n_components", "gmm_max_iter", "k_features", "samples_per_iteration", "iterations", "runs",
                        "n_trees", "max_depth", "min_leaf", "knn_k", "fingerprint_width", "synth_rows"}) {
    positive(k);
  }
  get_u64("seed");
  get_size("top_n");
  for (const char* k : {"synth", "cluster", "split", "active", "forest"}) stage_seed(k);
  const double tf = get_double("train_fraction");
  if (!(tf > 0.0 && tf < 1.0)) throw Error(ErrorKind::out_of_range, "train_fraction must lie in (0, 1)");
  if (!(get_double("gmm_tol") > 0.0)) throw Error(ErrorKind::out_of_range, "gmm_tol must be positive");
  if (!(get_double("prune_threshold") >= 0.0)) throw Error(ErrorKind::out_of_range, "prune_threshold must be >= 0");
  if (!(get_double("bin_width") > 0.0)) throw Error(ErrorKind::out_of_range, "bin_width must be positive");
  get_double("goal");
  get_double("threshold");
  for (const char* k : {"baseline", "track_accuracy", "clamp", "pooled_normalization"}) get_bool(k);
  auto one_of = [&](const char* key, std::initializer_list<std::string_view> allowed) {
    const std::string& v = get(key);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      throw Error(ErrorKind::invalid_argument, "unsupported " + std::string(key) + " '" + v + "'");
    }
  };
  one_of("strength", {"total", "direct"});
  one_of("spectrum", {"singular", "eigen"});
  one_of("goal_mode", {"at_least", "exact"});
  one_of("intervene_on", {"selected", "all"});
  one_of("match_features", {"all", "selected"});
  one_of("pca_source", {"features", "fingerprints", "none"});
  one_of("synth_world", {"descriptor", "benchmark", "spec"});
  if (get_list("pivots").empty()) throw Error(ErrorKind::invalid_argument, "pivots must not be empty");
  if (!is_set("target")) throw Error(ErrorKind::invalid_argument, "target must be set");
}

std::string config_text(const PipelineConfig& config) {
  std::ostringstream out;
  for (const auto& k : key_defaults()) {
    if (*k.comment) out << "# " << k.comment << '\n';
    out << k.key << " = " << config.get(k.key) << '\n';
  }
  return out.str();
}

std::string default_config_text() { return config_text(PipelineConfig{}); }

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> stages = {"cluster",   "discover", "select-features", "active-learn",
                                                  "intervene", "match",    "report"};
  return stages;
}

void run_stage(std::string_view stage, const PipelineConfig& config, std::size_t jobs) {
  config.validate();
  jobs = std::max<std::size_t>(jobs, 1);
  if (stage == "synth") return cmd_synth(config);
  if (stage == "cluster") return cmd_cluster(config);
  if (stage == "discover") return cmd_discover(config);
  if (stage == "select-features") return cmd_select_features(config);
  if (stage == "active-learn") return cmd_active_learn(config, jobs);
  if (stage == "intervene") return cmd_intervene(config, jobs);
  if (stage == "match") return cmd_match(config, jobs);
  if (stage == "report") return cmd_report(config);
  if (stage == "graph-dist") return cmd_graph_dist(config);
  throw Error(ErrorKind::invalid_argument, "unknown stage '" + std::string(stage) + "'");
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return h;
}

Failure describe_failure(const std::exception& e) {
  std::string what = e.what();
  std::replace(what.begin(), what.end(), '\n', ' ');
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->category()) {
      case ErrorCategory::io: return {3, "E_IO " + what};
      case ErrorCategory::config: return {2, "E_CONFIG " + what};
      case ErrorCategory::data: return {3, "E_DATA " + what};
      case ErrorCategory::numeric: return {4, "E_NUMERIC " + what};
    }
  }
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return {3, "E_IO " + what};
  return {3, "E_DATA " + what};
}

}  // namespace causal_al
