#include "causal_al/error.hpp"
#include "causal_al/regress.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace causal_al;

namespace {

FeatureTable line_table(std::size_t n, std::uint64_t seed) {
  test_support::Lcg g(seed);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), 3);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.symmetric();
    v(static_cast<Eigen::Index>(i), 0) = x;
    v(static_cast<Eigen::Index>(i), 1) = g.symmetric();
    v(static_cast<Eigen::Index>(i), 2) = 3.0 * x;
    ids.push_back("q" + std::to_string(i));
  }
  return FeatureTable(ids, {"x", "noise", "y"}, v, {"y"});
}

}  // namespace

TEST_CASE("r2_score on hand cases") {
  const Eigen::Vector3d y(1, 2, 3);
  CHECK(r2_score(y, y) == 1.0);
  CHECK(r2_score(y, Eigen::Vector3d(1, 2, 4)) == doctest::Approx(0.5));
  CHECK(r2_score(y, Eigen::Vector3d::Constant(2.0)) == 0.0);
  CHECK_THROWS_AS(r2_score(Eigen::Vector3d::Ones(), y), Error);
  CHECK_THROWS_AS(r2_score(Eigen::VectorXd(), Eigen::VectorXd()), Error);
}

TEST_CASE("forest fits a constant and a line") {
  FeatureTable flat = line_table(50, 1);
  Eigen::MatrixXd v = flat.values();
  v.col(2).setConstant(4.25);
  const std::vector<std::string> f{"x", "noise"};
  const ForestModel c = fit_forest(flat.with_values(v), f, "y", {10, 12, 2, 1, 1});
  CHECK((c.predict(flat).array() - 4.25).abs().maxCoeff() < 1e-12);
  for (const auto& t : c.trees) CHECK(t.nodes.size() == 1);

  const FeatureTable train = line_table(500, 2);
  const FeatureTable test = line_table(200, 3);
  ForestParams p;
  p.n_trees = 50;
  p.max_depth = 8;
  p.seed = 5;
  const ForestModel m = fit_forest(train, f, "y", p);
  const double score = r2(m, test);
  CHECK(score >= 0.95);
  for (const auto& t : m.trees) CHECK(t.depth() <= 8);

  p.jobs = 4;
  CHECK(r2(fit_forest(train, f, "y", p), test) == score);
  p.seed = 6;
  CHECK(r2(fit_forest(train, f, "y", p), test) != score);
}

TEST_CASE("forest prediction is the mean of the trees") {
  const FeatureTable train = line_table(200, 4);
  const std::vector<std::string> f{"x", "noise"};
  const ForestModel m = fit_forest(train, f, "y", {7, 5, 2, 9, 1});
  const Eigen::Vector2d x(0.3, -0.2);
  double sum = 0.0;
  for (const auto& t : m.trees) sum += t.predict(x.data());
  CHECK(m.predict_row(x) == doctest::Approx(sum / 7.0).epsilon(1e-15));
  CHECK_THROWS_AS(m.predict_row(Eigen::Vector3d::Zero()), Error);

  const std::vector<std::string> none;
  CHECK_THROWS_AS(fit_forest(train, none, "y"), Error);
  const std::vector<std::size_t> no_rows;
  CHECK_THROWS_AS(fit_forest(train.select_rows(no_rows), f, "y"), Error);
}

TEST_CASE("accuracy trace over active-learning snapshots") {
  const FeatureTable pool = line_table(60, 8);
  const FeatureTable test = line_table(40, 9);
  ActiveLearningRun run;
  run.samples_per_iteration = 30;
  run.iterations = 2;
  run.n_subsets = 1;
  for (std::size_t i = 0; i < 60; ++i) run.selected_row_ids.push_back(pool.row_ids()[59 - i]);
  run.records.resize(2);
  run.records[0].dataset_size = 30;
  run.records[1].dataset_size = 60;

  const std::vector<std::string> f{"x", "noise"};
  const ForestParams p{20, 6, 2, 3, 1};
  const AccuracyTrace tr = accuracy_trace(run, pool, test, f, "y", p);
  REQUIRE(tr.r2.size() == 2);
  CHECK(tr.r2[1] == tr.reference);
  CHECK(tr.reference == r2(fit_forest(pool, f, "y", p), test));

  run.selected_row_ids[0] = "missing";
  try {
    accuracy_trace(run, pool, test, f, "y", p);
    FAIL("expected UnknownRow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unknown_row);
  }
}
