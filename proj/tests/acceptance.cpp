// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit when any fails.
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
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <sys/wait.h>

using namespace causal_al;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::size_t hw_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  const auto start = Clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::ostringstream line;
  line << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << o.detail << "; "
       << std::fixed;
  line.precision(1);
  line << seconds_since(start) << " s]";
  std::cout << line.str() << std::endl;
  if (!o.pass) ++failures;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// Random DAG over n nodes with the causal order scrambled against the index order.
Eigen::MatrixXd random_dag(Rng& rng, std::size_t n, double density) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t c = 1; c < n; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      if (rng.uniform() < density) {
        const double w = rng.uniform(0.2, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        b(static_cast<Eigen::Index>(perm[c]), static_cast<Eigen::Index>(perm[p])) = w;
      }
    }
  }
  return b;
}

std::vector<std::string> node_names(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("v" + std::to_string(i));
  return v;
}

SemSpec spec_from(const Eigen::MatrixXd& b, std::uint64_t seed) {
  SemSpec s;
  const auto names = node_names(static_cast<std::size_t>(b.rows()));
  for (const auto& n : names) s.add_node(n);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      if (b(i, j) != 0.0) s.add_edge(names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(j)], b(i, j));
    }
  }
  s.seed = seed;
  return s;
}

Outcome lingam_recovery() {
  int order_ok = 0;
  int weight_ok = 0;
  int pruned = 0;
  double slowest = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // an unrelated sink keeps the x/y order free for discovery to decide
    SemSpec two;
    two.add_node("x");
    two.add_node("y");
    two.add_node("t");
    two.add_edge("y", "x", 0.8);
    two.seed = seed;
    const FeatureTable t2 = sample_sem(two, 5000);
    auto start = Clock::now();
    const WeightedDag g = discover_lingam(t2, "t", {0.05, true});
    slowest = std::max(slowest, seconds_since(start));
    const auto& ord = g.causal_order();
    const auto px = std::find(ord.begin(), ord.end(), g.index_of("x"));
    const auto py = std::find(ord.begin(), ord.end(), g.index_of("y"));
    if (px < py && g.weight("x", "y") == 0.0) ++order_ok;
    if (std::abs(g.weight("y", "x") - 0.8) <= 0.05) ++weight_ok;

    SemSpec chain;
    chain.add_node("x1");
    chain.add_node("x2");
    chain.add_node("x3");
    chain.add_edge("x2", "x1", 0.8);
    chain.add_edge("x3", "x2", 0.7);
    chain.seed = 100 + seed;
    const FeatureTable t3 = sample_sem(chain, 5000);
    start = Clock::now();
    const WeightedDag c = discover_lingam(t3, "x3");
    slowest = std::max(slowest, seconds_since(start));
    if (c.weight("x3", "x1") == 0.0 && c.weight("x3", "x2") != 0.0 && c.weight("x2", "x1") != 0.0) ++pruned;
  }
  return {order_ok >= 9 && weight_ok >= 9 && pruned >= 9 && slowest < 10.0,
          "order " + std::to_string(order_ok) + "/10, weight " + std::to_string(weight_ok) + "/10, chain pruned " +
              std::to_string(pruned) + "/10, slowest fit " + fmt(slowest) + " s"};
}

Outcome sink_constraint() {
  Rng rng(2024);
  int zero = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.index(6));
    const Eigen::MatrixXd b = random_dag(rng, n, 0.5);
    const SemSpec s = spec_from(b, derive_seed(77, static_cast<std::uint64_t>(i)));
    const FeatureTable t = sample_sem(s, 400);
    const std::string target = s.nodes[static_cast<std::size_t>(rng.index(n))];
    const WeightedDag g = discover_lingam(t, target);
    if ((g.weights().col(static_cast<Eigen::Index>(g.index_of(target))).array() == 0.0).all()) ++zero;
  }
  return {zero == 100, std::to_string(zero) + "/100 target columns exactly zero"};
}

Outcome spectral_axioms() {
  Rng rng(31337);
  double worst = 0.0;
  int triangle_bad = 0;
  bool nonneg = true;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.index(11));
    const auto names = node_names(n);
    const WeightedDag a(names, random_dag(rng, n, 0.4));
    const WeightedDag b(names, random_dag(rng, n, 0.4));
    const WeightedDag c(names, random_dag(rng, n, 0.4));
    const double ab = spectral_distance(a, b);
    nonneg = nonneg && ab >= 0.0;
    worst = std::max(worst, std::abs(ab - spectral_distance(b, a)));
    worst = std::max(worst, spectral_distance(a, a));

    // same graph as b with its nodes listed in a shuffled order
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < n; ++k) perm[k] = k;
    rng.shuffle(perm);
    Eigen::MatrixXd pw(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<std::string> pn(n);
    for (std::size_t r = 0; r < n; ++r) {
      pn[r] = names[perm[r]];
      for (std::size_t s = 0; s < n; ++s) {
        pw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) =
            b.weights()(static_cast<Eigen::Index>(perm[r]), static_cast<Eigen::Index>(perm[s]));
      }
    }
    worst = std::max(worst, std::abs(spectral_distance(a, WeightedDag(pn, pw)) - ab));
    if (spectral_distance(a, c) > ab + spectral_distance(b, c) + 1e-10) ++triangle_bad;
  }
  return {nonneg && worst <= 1e-10 && triangle_bad == 0,
          "max symmetry/self/permutation deviation " + fmt(worst) + ", triangle violations " +
              std::to_string(triangle_bad)};
}

struct BenchmarkResult {
  std::vector<ActiveLearningRun> active;
  std::vector<ActiveLearningRun> random;
  std::vector<double> r2_active;
  std::vector<double> r2_random;
  std::size_t matching_subset = 0;
  double loop_seconds = 0.0;
};

const BenchmarkResult& benchmark() {
  static const BenchmarkResult result = [] {
    BenchmarkResult r;
    const SemSpec shared = benchmark_sem();
    const WorldOptions opt = benchmark_world_options(2024);
    r.matching_subset = opt.matching_subset;
    const HeterogeneousWorld world = make_heterogeneous_world(shared, opt);
    const std::string target = shared.targets.back();
    std::vector<std::string> features;
    for (const auto& n : shared.nodes) {
      if (n != target) features.push_back(n);
    }
    const auto start = Clock::now();
    const WeightedDag global = discover_lingam(world.global, target);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      ActiveLearningParams p;
      p.samples_per_iteration = 50;
      p.iterations = 20;
      p.seed = seed;
      p.jobs = hw_jobs();
      r.active.push_back(active_learn(world.subsets, global, features, target, p));
      r.random.push_back(random_baseline(world.subsets, global, features, target, p));
    }
    r.loop_seconds = seconds_since(start);

    const FeatureTable pool = FeatureTable::concat(world.subsets);
    WorldOptions held = opt;
    held.seed = derive_seed(opt.seed, 999);
    const FeatureTable test = make_heterogeneous_world(shared, held).global;
    ForestParams fp;
    fp.jobs = hw_jobs();
    auto final_r2 = [&](const ActiveLearningRun& run) {
      std::vector<std::size_t> rows;
      for (const auto& id : run.snapshot(run.records.size())) rows.push_back(*pool.find_row(id));
      std::sort(rows.begin(), rows.end());
      fp.seed = run.seed;
      return r2(fit_forest(pool.select_rows(rows), features, target, fp), test);
    };
    for (std::size_t i = 0; i < r.active.size(); ++i) {
      r.r2_active.push_back(final_r2(r.active[i]));
      r.r2_random.push_back(final_r2(r.random[i]));
    }
    return r;
  }();
  return result;
}

Outcome active_vs_random() {
  const BenchmarkResult& b = benchmark();
  const LossSummary a = summarize_runs(b.active);
  const LossSummary r = summarize_runs(b.random);
  std::map<std::size_t, std::size_t> counts;
  int paired = 0;
  for (std::size_t i = 0; i < b.active.size(); ++i) {
    for (const auto& rec : b.active[i].records) ++counts[rec.chosen];
    if (b.active[i].records.back().loss <= b.random[i].records.back().loss) ++paired;
  }
  const auto modal = std::max_element(counts.begin(), counts.end(), [](const auto& x, const auto& y) {
                       return x.second < y.second;
                     })->first;
  const bool pass = a.mean.back() < r.mean.back() && a.stddev.back() <= r.stddev.back() &&
                    modal == b.matching_subset && b.loop_seconds < 300.0;
  return {pass, "final loss active " + fmt(a.mean.back()) + " +- " + fmt(a.stddev.back()) + " vs random " +
                    fmt(r.mean.back()) + " +- " + fmt(r.stddev.back()) + ", modal subset " + std::to_string(modal) +
                    " (matching " + std::to_string(b.matching_subset) + "), active <= random in " +
                    std::to_string(paired) + "/10 pairs, loop " + fmt(b.loop_seconds) + " s"};
}

Outcome r2_neutrality() {
  const BenchmarkResult& b = benchmark();
  double ma = 0.0;
  double mr = 0.0;
  for (std::size_t i = 0; i < b.r2_active.size(); ++i) {
    ma += b.r2_active[i] / static_cast<double>(b.r2_active.size());
    mr += b.r2_random[i] / static_cast<double>(b.r2_random.size());
  }
  return {std::abs(ma - mr) < 0.1, "final R2 active " + fmt(ma) + " vs random " + fmt(mr)};
}

// Sum over directed paths from `from` to `to` of the edge-weight products.
double path_sum(const Eigen::MatrixXd& b, Eigen::Index from, Eigen::Index to) {
  if (from == to) return 1.0;
  double s = 0.0;
  for (Eigen::Index c = 0; c < b.rows(); ++c) {
    if (b(c, from) != 0.0) s += b(c, from) * path_sum(b, c, to);
  }
  return s;
}

Outcome intervention_exactness() {
  SemSpec s;
  for (const char* n : {"a", "b", "c", "d", "e"}) s.add_node(n, {NoiseFamily::uniform, 1.0});
  s.add_node("y", {NoiseFamily::none, 0.0, 1.2});
  s.add_edge("b", "a", 0.9);
  s.add_edge("c", "a", -0.5);
  s.add_edge("d", "b", 0.6);
  s.add_edge("d", "c", 1.1);
  s.add_edge("y", "a", 0.3);
  s.add_edge("y", "d", 0.8);
  s.add_edge("y", "e", -0.7);
  s.add_edge("e", "c", 0.4);
  s.seed = 5;
  const FeatureTable data = sample_sem(s, 1000);
  const WeightedDag sem = fit_sem_weights(data, s.true_dag("y"));
  const EffectMatrix effects = total_effects(sem);

  InterventionOptions opt;
  opt.goal = 3.0;
  opt.mode = GoalMode::exact;
  const auto plans = plan_interventions(sem, data, "y", opt, hw_jobs());
  const FeatureTable after = apply_interventions(data, plans, effects);
  const Eigen::VectorXd pred = predict_target_sem(sem, after, "y");
  const double worst = (pred.array() - opt.goal).abs().maxCoeff();

  // exhaustive enumeration of |total effect| over every feature
  const auto t = static_cast<Eigen::Index>(sem.index_of("y"));
  std::string best;
  double best_abs = -1.0;
  std::vector<std::string> names = sem.node_names();
  std::sort(names.begin(), names.end());
  for (const auto& n : names) {
    if (n == "y") continue;
    const double e = std::abs(path_sum(sem.weights(), static_cast<Eigen::Index>(sem.index_of(n)), t));
    if (e > best_abs + 1e-12) {
      best_abs = e;
      best = n;
    }
  }
  const bool argmax = std::all_of(plans.begin(), plans.end(), [&](const auto& p) { return p.feature == best; });
  return {worst <= 1e-9 && argmax,
          "max |pred - goal| " + fmt(worst) + " over " + std::to_string(plans.size()) + " rows, lever " + best +
              (argmax ? "" : " (plans disagree)")};
}

Outcome total_effect_oracle() {
  Rng rng(4242);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.index(11));
    const Eigen::MatrixXd b = random_dag(rng, n, 0.4);
    const EffectMatrix e = total_effects(WeightedDag(node_names(n), b));
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(b.rows(), b.cols());
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(b.rows(), b.cols());
    for (std::size_t p = 1; p < n; ++p) {
      power = power * b;
      sum += power;
    }
    worst = std::max(worst, (e.total - sum).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, "max |T - sum B^p| " + fmt(worst) + " over 100 DAGs"};
}

Outcome knn_equivalence() {
  const std::size_t nq = 1000;
  const std::size_t nr = 10000;
  const std::size_t d = 12;
  const std::size_t k = 5;
  Rng rng(8);
  auto make = [&](std::size_t rows, const std::string& prefix) {
    Eigen::MatrixXd v(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = rng.normal() * static_cast<double>(j + 1) + 0.5 * j;
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < rows; ++i) ids.push_back(prefix + std::to_string(i));
    return FeatureTable(ids, node_names(d), v);
  };
  const FeatureTable q = make(nq, "q");
  const FeatureTable r = make(nr, "r");
  MatchOptions opt;
  opt.k = k;
  opt.jobs = hw_jobs();
  const auto start = Clock::now();
  const auto res = nearest_in_reference(q, r, opt);
  const double elapsed = seconds_since(start);

  // double loop over z-scores computed from the queries (sample sd)
  std::vector<double> mean(d, 0.0);
  std::vector<double> sd(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < nq; ++i) mean[j] += q.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    mean[j] /= static_cast<double>(nq);
    for (std::size_t i = 0; i < nq; ++i) {
      const double c = q.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - mean[j];
      sd[j] += c * c;
    }
    sd[j] = std::sqrt(sd[j] / static_cast<double>(nq - 1));
  }
  std::size_t id_mismatch = 0;
  double worst = 0.0;
  std::vector<std::pair<double, std::size_t>> dist(nr);
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double a = (q.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - mean[c]) / sd[c];
        const double b = (r.values()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) - mean[c]) / sd[c];
        s += (a - b) * (a - b);
      }
      dist[j] = {std::sqrt(s), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    if (res[i].query_id != q.row_ids()[i] || res[i].neighbors.size() != k) {
      ++id_mismatch;
      continue;
    }
    for (std::size_t n = 0; n < k; ++n) {
      if (res[i].neighbors[n].ref_id != r.row_ids()[dist[n].second]) ++id_mismatch;
      worst = std::max(worst, std::abs(res[i].neighbors[n].distance - dist[n].first));
    }
  }
  return {id_mismatch == 0 && worst <= 1e-12 && elapsed < 60.0,
          "1000 x 10000, k=5: id mismatches " + std::to_string(id_mismatch) + ", max distance deviation " +
              fmt(worst) + ", search " + fmt(elapsed) + " s"};
}

Outcome tanimoto_suite() {
  int bad = 0;
  auto expect = [&](bool ok) {
    if (!ok) ++bad;
  };
  const auto a = Bitvector::from_bits("1100");
  const auto b = Bitvector::from_bits("1010");
  expect(tanimoto(a, b) == 1.0 / 3.0);
  expect(tanimoto(Bitvector::from_bits("1110"), Bitvector::from_bits("0111")) == 0.5);
  expect(tanimoto(a, Bitvector::from_bits("0011")) == 0.0);
  expect(tanimoto(Bitvector(16), Bitvector(16)) == 1.0);
  expect(tanimoto(a, Bitvector(4)) == 0.0);
  try {
    tanimoto(a, Bitvector(8));
    ++bad;
  } catch (const Error& e) {
    expect(e.kind() == ErrorKind::width_mismatch);
  }
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    Bitvector x(2048);
    Bitvector y(2048);
    for (std::size_t bit = 0; bit < 2048; ++bit) {
      if (rng.uniform() < 0.1) x.set(bit);
      if (rng.uniform() < 0.1) y.set(bit);
    }
    const double s = tanimoto(x, y);
    expect(s == tanimoto(y, x));
    expect(tanimoto(x, x) == 1.0);
    expect(s >= 0.0 && s <= 1.0);
    std::size_t both = 0;
    std::size_t either = 0;
    for (std::size_t bit = 0; bit < 2048; ++bit) {
      both += x.test(bit) && y.test(bit);
      either += x.test(bit) || y.test(bit);
    }
    expect(s == static_cast<double>(both) / static_cast<double>(either));
  }
  return {bad == 0, std::to_string(bad) + " failed properties"};
}

Outcome gmm_checks() {
  std::size_t fits = 0;
  double worst_drop = 0.0;
  auto monotone = [&](const GmmModel& m) {
    ++fits;
    for (std::size_t i = 1; i < m.log_likelihood_trace.size(); ++i) {
      worst_drop = std::max(worst_drop, m.log_likelihood_trace[i - 1] - m.log_likelihood_trace[i]);
    }
  };
  const std::vector<std::string> ab{"a", "b"};
  double worst_mean = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FeatureTable t = test_support::two_cluster_table(300, 5 + seed);
    for (std::size_t init = 0; init < 3; ++init) {
      GmmOptions o;
      o.n_components = 2;
      o.seed = derive_seed(seed, init);
      o.n_init = 1;
      const GmmModel m = fit_gmm(t, ab, o);
      monotone(m);
      Eigen::MatrixXd means = m.original_means();
      if (means(0, 0) > means(1, 0)) means.row(0).swap(means.row(1));
      worst_mean = std::max({worst_mean, std::abs(means(0, 0) + 2.0), std::abs(means(0, 1)),
                             std::abs(means(1, 0) - 3.0), std::abs(means(1, 1) - 1.0)});
    }
  }
  const DescriptorWorld dw = descriptor_world(3);
  const HeterogeneousWorld world = make_heterogeneous_world(dw.spec, dw.options);
  const FeatureTable pooled = FeatureTable::concat(world.subsets);
  const std::vector<std::string> pivots{"MolLogP", "TPSA", "MolMR"};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    GmmOptions o;
    o.seed = seed;
    o.n_init = 1;
    monotone(fit_gmm(pooled, pivots, o));
  }
  return {worst_drop <= 1e-9 && worst_mean <= 0.3,
          std::to_string(fits) + " fits, largest log-likelihood drop " + fmt(worst_drop) +
              ", largest two-cluster mean error " + fmt(worst_mean)};
}

int run_in(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd \"" + dir.string() + "\" && \"" + CAUSAL_AL_CLI + "\" " + args + " > cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> comparable_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<std::string> lines;
  std::string line;
  const bool manifest = p.filename() == "manifest.txt";
  while (std::getline(in, line)) {
    if (manifest && (line.starts_with("duration_seconds") || line.starts_with("timestamp"))) continue;
    lines.push_back(line);
  }
  return lines;
}

const char* kReducedConfig =
    "out_dir = out\n"
    "features = out/synth/features.csv\n"
    "fingerprints = out/synth/fingerprints.csv\n"
    "reference = out/synth/reference.csv\n"
    "reference_fingerprints = out/synth/reference_fingerprints.csv\n"
    "target_columns = polarizability,dipole\n"
    "target = dipole\n"
    "seed = 7\n"
    "runs = 2\n"
    "n_trees = 20\n";

Outcome determinism(const fs::path& root) {
  const std::vector<std::pair<std::string, std::string>> variants{{"a", "-j 1"}, {"b", "-j 1"}, {"c", "-j 4"}};
  for (const auto& [name, jobs] : variants) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.txt") << kReducedConfig;
    if (run_in(dir, "-c cfg.txt " + jobs + " synth") != 0 || run_in(dir, "-c cfg.txt " + jobs + " all") != 0) {
      return {false, "pipeline run " + name + " failed, see " + (dir / "cli.log").string()};
    }
  }
  std::size_t files = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a" / "out")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    ++files;
    const auto base = comparable_lines(entry.path());
    for (const char* other : {"b", "c"}) {
      if (!fs::exists(root / other / rel) || comparable_lines(root / other / rel) != base) {
        differing.push_back(std::string(other) + ":" + rel.string());
      }
    }
  }
  std::size_t counts[2] = {0, 0};
  for (const char* other : {"b", "c"}) {
    for (const auto& entry : fs::recursive_directory_iterator(root / other / "out")) {
      if (entry.is_regular_file()) ++counts[other[0] - 'b'];
    }
  }
  const bool same_sets = counts[0] == files && counts[1] == files;
  return {differing.empty() && same_sets && files > 0,
          std::to_string(files) + " files compared across two -j 1 runs and one -j 4 run, " +
              std::to_string(differing.size()) + " differ" + (differing.empty() ? "" : " (first " + differing[0] + ")")};
}

Outcome smoke_path(const fs::path& root) {
  // a plain descriptor CSV standing in for user data: 20 descriptors, an intermediate and the target
  const DescriptorWorld dw = descriptor_world(11);
  const HeterogeneousWorld world = make_heterogeneous_world(dw.spec, dw.options);
  fs::create_directories(root);
  save_feature_table(FeatureTable::concat(world.subsets), root / "descriptors.csv");
  const std::size_t n_features = world.subsets[0].cols() - 2;
  std::ofstream(root / "cfg.txt") << "out_dir = out\nfeatures = descriptors.csv\n"
                                     "target_columns = polarizability,dipole\ntarget = dipole\n"
                                     "k_features = 9\ngoal = 3\nruns = 2\nn_trees = 20\n";
  for (const char* stage : {"cluster", "discover", "select-features", "active-learn", "intervene", "match"}) {
    if (run_in(root, std::string("-c cfg.txt -j 4 ") + stage) != 0) {
      return {false, std::string("stage ") + stage + " failed, see " + (root / "cli.log").string()};
    }
  }
  const bool artifacts = fs::exists(root / "out" / "select" / "features.txt") &&
                         fs::exists(root / "out" / "intervene" / "plans.csv") &&
                         fs::exists(root / "out" / "match" / "neighbors.csv");
  return {artifacts && n_features >= 20,
          std::to_string(n_features) + " descriptor columns, cluster through match completed"};
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("causal_al_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  report(1, "LiNGAM recovery", lingam_recovery);
  report(2, "sink constraint", sink_constraint);
  report(3, "spectral distance axioms", spectral_axioms);
  report(4, "active selection beats random", active_vs_random);
  report(5, "R2 neutrality", r2_neutrality);
  report(6, "intervention exactness", intervention_exactness);
  report(7, "total-effect path sums", total_effect_oracle);
  report(8, "k-NN brute-force equivalence", knn_equivalence);
  report(9, "Tanimoto properties", tanimoto_suite);
  report(10, "GMM monotone EM and recovery", gmm_checks);
  report(11, "pipeline determinism", [&] { return determinism(root / "determinism"); });
  report(12, "descriptor CSV smoke path", [&] { return smoke_path(root / "smoke"); });
  std::error_code ec;
  fs::remove_all(root, ec);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
