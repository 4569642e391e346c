#include "causal_al/active.hpp"
#include "causal_al/error.hpp"
#include "causal_al/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace causal_al;

namespace {

struct Fixture {
  HeterogeneousWorld world;
  WeightedDag global;
  std::vector<std::string> features;

  Fixture() {
    const SemSpec shared = benchmark_sem();
    WorldOptions opt = benchmark_world_options(11);
    opt.rows_per_subset = 200;
    opt.global_rows = 1500;
    world = make_heterogeneous_world(shared, opt);
    global = discover_lingam(world.global, "y");
    for (const auto& n : shared.nodes) {
      if (n != "y") features.push_back(n);
    }
  }
};

ActiveLearningParams small_params(std::uint64_t seed) {
  ActiveLearningParams p;
  p.samples_per_iteration = 30;
  p.iterations = 4;
  p.seed = seed;
  return p;
}

ActiveLearningRun fake_run(std::vector<double> losses) {
  ActiveLearningRun r;
  for (std::size_t i = 0; i < losses.size(); ++i) r.records.push_back({i + 1, {losses[i]}, 0, losses[i], i + 1});
  return r;
}

}  // namespace

TEST_CASE("active learning loop invariants") {
  const Fixture f;
  const ActiveLearningRun run = active_learn(f.world.subsets, f.global, f.features, "y", small_params(3));
  REQUIRE(run.records.size() == 4);
  std::set<std::string> ids(run.selected_row_ids.begin(), run.selected_row_ids.end());
  CHECK(ids.size() == 120);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& r = run.records[i];
    CHECK(r.iteration == i + 1);
    CHECK(r.dataset_size == 30 * (i + 1));
    REQUIRE(r.losses.size() == 3);
    CHECK(r.loss == *std::min_element(r.losses.begin(), r.losses.end()));
    CHECK(r.losses[r.chosen] == r.loss);
    CHECK(run.snapshot(i + 1).size() == r.dataset_size);
    // committed rows come from the chosen subset
    for (const auto& id : run.snapshot(i + 1).last(30)) CHECK(id.starts_with("s" + std::to_string(r.chosen) + "_"));
  }
  CHECK_THROWS_AS(run.snapshot(0), Error);
  CHECK(run.loss_trajectory().size() == 4);

  const ActiveLearningRun again = active_learn(f.world.subsets, f.global, f.features, "y", small_params(3));
  CHECK(again.selected_row_ids == run.selected_row_ids);
  ActiveLearningParams par = small_params(3);
  par.jobs = 3;
  const ActiveLearningRun threaded = active_learn(f.world.subsets, f.global, f.features, "y", par);
  CHECK(threaded.selected_row_ids == run.selected_row_ids);
  CHECK(threaded.loss_trajectory() == run.loss_trajectory());

  // both rules draw identical candidates, so the losses of iteration 1 agree
  const ActiveLearningRun rnd = random_baseline(f.world.subsets, f.global, f.features, "y", small_params(3));
  CHECK(rnd.records[0].losses == run.records[0].losses);
  CHECK(rnd.rule == SelectionRule::random);

  const std::vector<FeatureTable> one{f.world.subsets[1]};
  const ActiveLearningRun single = active_learn(one, f.global, f.features, "y", small_params(4));
  for (const auto& r : single.records) CHECK(r.chosen == 0);
}

TEST_CASE("active learning preconditions") {
  const Fixture f;
  ActiveLearningParams p = small_params(1);
  p.samples_per_iteration = 0;
  CHECK_THROWS_AS(active_learn(f.world.subsets, f.global, f.features, "y", p), Error);
  p = small_params(1);
  p.iterations = 0;
  CHECK_THROWS_AS(active_learn(f.world.subsets, f.global, f.features, "y", p), Error);
  p = small_params(1);
  p.iterations = 7;  // 7 * 30 > 200 rows per subset
  try {
    active_learn(f.world.subsets, f.global, f.features, "y", p);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_data);
  }
}

TEST_CASE("loss summaries") {
  const std::vector<ActiveLearningRun> runs{fake_run({1.0, 4.0}), fake_run({3.0, 4.0})};
  const LossSummary s = summarize_runs(runs);
  CHECK(s.mean == std::vector<double>{2.0, 4.0});
  CHECK(s.stddev[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(s.stddev[1] == 0.0);
  const std::vector<ActiveLearningRun> single{fake_run({5.0})};
  CHECK(summarize_runs(single).stddev[0] == 0.0);
  CHECK_THROWS_AS(summarize_runs(std::vector<ActiveLearningRun>{}), Error);
  const std::vector<ActiveLearningRun> ragged{fake_run({1.0}), fake_run({1.0, 2.0})};
  CHECK_THROWS_AS(summarize_runs(ragged), Error);
  CHECK(parse_rule("random") == SelectionRule::random);
  CHECK(rule_name(SelectionRule::active) == "active");
  CHECK_THROWS_AS(parse_rule("greedy"), Error);
}

TEST_CASE("run records round-trip") {
  test_support::TempDir dir("active_io");
  ActiveLearningRun run;
  run.n_subsets = 2;
  run.records.push_back({1, {0.5, std::numeric_limits<double>::infinity()}, 0, 0.5, 10});
  run.records.push_back({2, {1.0 / 3.0, 0.25}, 1, 0.25, 20});
  save_run_records(run, dir / "run.csv");
  const auto back = load_run_records(dir / "run.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].losses[0] == 0.5);
  CHECK(std::isinf(back[0].losses[1]));
  CHECK(back[1].losses[0] == 1.0 / 3.0);
  CHECK(back[1].chosen == 1);
  CHECK(back[1].loss == 0.25);
  CHECK(back[1].dataset_size == 20);

  const std::vector<std::string> ids{"a", "b,c", "d"};
  save_id_list(ids, dir / "ids.txt");
  CHECK(load_id_list(dir / "ids.txt") == ids);
}
