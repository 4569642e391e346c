#include "causal_al/causal.hpp"
#include "causal_al/error.hpp"
#include "causal_al/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <chrono>

using namespace causal_al;

namespace {

// Standardized weights from the numpy DirectLiNGAM oracle, node order x3, y, x1, x4, x2.
const double kOracleStd[25] = {0.0, 0.0, 0.0, 0.0, -0.5987003294635784, 0.0, 0.0, 0.0, -0.2919907279841516,
                               0.7062139281466164, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6560188979600421, 0.0,
                               0.3861379220617907, 0.0, 0.0, 0.0, 0.0, 0.638678197867211, 0.0, 0.0};
const double kOracleOrig[25] = {0.0, 0.0, 0.0, 0.0, -0.5857581757320679, 0.0, 0.0, 0.0, -0.3790439945079938,
                                0.8917501103096409, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6698188862228336, 0.0,
                                0.4791676933340879, 0.0, 0.0, 0.0, 0.0, 0.802916589706148, 0.0, 0.0};

Eigen::MatrixXd oracle_matrix(const double* v) {
  Eigen::MatrixXd m(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) m(i, j) = v[i * 5 + j];
  }
  return m;
}

SemSpec two_variable(std::uint64_t seed) {
  SemSpec s;
  s.add_node("x");
  s.add_node("y");
  s.add_edge("y", "x", 0.8);
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("entropy approximation matches the numpy oracle") {
  const FeatureTable t = test_support::five_node_table(2000, 7);
  Eigen::VectorXd u = t.column("x3");
  u = (u.array() - u.mean()) / std::sqrt((u.array() - u.mean()).square().mean());
  CHECK(entropy_approx(std::span<const double>(u.data(), static_cast<std::size_t>(u.size()))) ==
        doctest::Approx(1.4116509448965568).epsilon(1e-12));
}

TEST_CASE("DirectLiNGAM agrees with the independent oracle") {
  const FeatureTable t = test_support::five_node_table(2000, 7);
  const WeightedDag dag = discover_lingam(t, "y");
  std::vector<std::string> order;
  for (auto i : dag.causal_order()) order.push_back(dag.node_names()[i]);
  CHECK(order == std::vector<std::string>{"x1", "x2", "x3", "x4", "y"});
  CHECK((dag.weights() - oracle_matrix(kOracleStd)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(dag.scale() == WeightScale::standardized);

  const WeightedDag sem = fit_sem_weights(t, dag);
  CHECK(sem.scale() == WeightScale::original);
  CHECK((sem.weights() - oracle_matrix(kOracleOrig)).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE(sem.stats());
  // oracle residual variances are standardized; the original-scale SEM carries them times sd^2
  const double sd_y = 0.951161783466229;
  const double sd_x1 = 0.587554241539564;
  CHECK(sem.stats()->residual_variance(1) == doctest::Approx(0.37317141020614336 * sd_y * sd_y).epsilon(1e-9));
  CHECK(sem.stats()->residual_variance(2) == doctest::Approx(0.9999999999999993 * sd_x1 * sd_x1).epsilon(1e-9));
  const WeightedDag std_sem = fit_sem_weights(t, dag, {WeightScale::standardized});
  CHECK(std_sem.stats()->residual_variance(0) == doctest::Approx(0.6402895178548292).epsilon(1e-9));
  CHECK(std_sem.stats()->residual_variance(3) == doctest::Approx(0.6134883445725255).epsilon(1e-9));
  CHECK(std_sem.stats()->residual_variance(4) == doctest::Approx(0.5920901595690905).epsilon(1e-9));
  CHECK(sem.weight("y", "x2") == doctest::Approx(0.8917501103096409).epsilon(1e-9));
}

TEST_CASE("two-variable recovery and runtime") {
  int correct = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FeatureTable t = sample_sem(two_variable(seed), 5000);
    const auto start = std::chrono::steady_clock::now();
    const WeightedDag dag = discover_lingam(t, "y", {0.05, true});
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 10.0);
    if (dag.weight("y", "x") != 0.0 && dag.weight("x", "y") == 0.0) ++correct;
    CHECK(dag.weight("y", "x") == doctest::Approx(0.8).epsilon(0.0625));
  }
  CHECK(correct >= 9);
}

TEST_CASE("the target is always a sink") {
  // truth: y -> x, so an unconstrained search would order y first
  SemSpec s;
  s.add_node("y");
  s.add_node("x");
  s.add_node("z");
  s.add_edge("x", "y", 0.9);
  s.add_edge("z", "x", 0.5);
  s.seed = 4;
  const FeatureTable t = sample_sem(s, 2000);
  const WeightedDag dag = discover_lingam(t, "y");
  CHECK(dag.weights().col(static_cast<Eigen::Index>(dag.index_of("y"))).isZero(0.0));
  CHECK(dag.causal_order().back() == dag.index_of("y"));
}

TEST_CASE("discovery preconditions") {
  const FeatureTable t = test_support::five_node_table(14, 7);
  CHECK_THROWS_AS(discover_lingam(t, "y"), Error);
  const FeatureTable ok = test_support::five_node_table(100, 7);
  CHECK_THROWS_AS(discover_lingam(ok, "nope"), Error);
  Eigen::MatrixXd v = ok.values();
  v.col(0).setConstant(1.0);
  try {
    discover_lingam(ok.with_values(v), "y");
    FAIL("expected DegenerateFeature");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_feature);
  }
}

TEST_CASE("WeightedDag validation, rescaling and persistence") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
  b(1, 0) = 0.5;
  b(2, 1) = -2.0;
  const WeightedDag dag({"a", "b", "c"}, b, std::string("c"));
  CHECK(dag.causal_order() == std::vector<std::size_t>{0, 1, 2});
  CHECK(dag.parents(2) == std::vector<std::size_t>{1});

  Eigen::MatrixXd bad = b;
  bad(1, 2) = 0.1;  // c -> b leaves the target
  CHECK_THROWS_AS(WeightedDag({"a", "b", "c"}, bad, std::string("c")), Error);
  Eigen::MatrixXd cyc = b;
  cyc(0, 2) = 0.3;
  CHECK_THROWS_AS(WeightedDag({"a", "b", "c"}, cyc), Error);
  CHECK_THROWS_AS(topological_order(cyc), Error);

  NodeStats stats{Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(2, 4, 0.5), Eigen::Vector3d::Ones(), {false, false, true}};
  const WeightedDag scaled({"a", "b", "c"}, b, std::string("c"), {}, WeightScale::standardized, stats);
  const WeightedDag orig = scaled.rescaled(WeightScale::original);
  CHECK(orig.weight("b", "a") == doctest::Approx(0.5 * 4.0 / 2.0));
  CHECK(orig.weight("c", "b") == doctest::Approx(-2.0 * 0.5 / 4.0));
  CHECK((orig.rescaled(WeightScale::standardized).weights() - b).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(dag.rescaled(WeightScale::original), Error);
  CHECK(scaled.pruned(0.6).weight("b", "a") == 0.0);

  test_support::TempDir dir("causal_dag");
  save_dag(orig, dir / "g.txt");
  const WeightedDag back = load_dag(dir / "g.txt");
  CHECK(back.weights() == orig.weights());
  CHECK(back.node_names() == orig.node_names());
  CHECK(back.target() == orig.target());
  CHECK(back.scale() == WeightScale::original);
  REQUIRE(back.stats());
  CHECK(back.stats()->stddev == stats.stddev);
  CHECK(back.stats()->ridge_fallback == stats.ridge_fallback);
}

TEST_CASE("feature ranking by total effect") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);  // x1, x2, x3, y
  b(1, 0) = 0.5;
  b(3, 1) = 2.0;
  b(3, 2) = -1.5;
  b(3, 0) = 0.1;
  const WeightedDag dag({"x1", "x2", "x3", "y"}, b, std::string("y"));
  const FeatureRanking r = rank_features(dag, "y");
  REQUIRE(r.size() == 3);
  CHECK(r[0].name == "x2");
  CHECK(r[1].name == "x3");
  CHECK(r[2].name == "x1");
  CHECK(r[2].strength == doctest::Approx(1.1));
  const FeatureRanking direct = rank_features(dag, "y", StrengthMode::direct_weight);
  CHECK(direct[2].strength == doctest::Approx(0.1));
  CHECK(select_top_k(r, 2) == std::vector<std::string>{"x2", "x3"});
  CHECK_THROWS_AS(select_top_k(r, 0), Error);
  CHECK_THROWS_AS(select_top_k(r, 4), Error);

  Eigen::MatrixXd tie = Eigen::MatrixXd::Zero(3, 3);
  tie(2, 0) = 1.0;
  tie(2, 1) = -1.0;
  const FeatureRanking t = rank_features(WeightedDag({"b", "a", "y"}, tie, std::string("y")), "y");
  CHECK(t[0].name == "a");
}
