#include "causal_al/regress.hpp"

#include "causal_al/error.hpp"
#include "causal_al/parallel.hpp"
#include "causal_al/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace causal_al {

double RegressionTree::predict(const double* x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes[i].feature >= 0) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params, Rng& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {
    const auto d = static_cast<std::size_t>(x.cols());
    all_features_.resize(d);
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    mtry_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
  }

  RegressionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  std::size_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const std::size_t id = tree_.nodes.size();
    tree_.nodes.emplace_back();
    const auto n = rows.size();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (auto r : rows) {
      const double v = y_(static_cast<Eigen::Index>(r));
      sum += v;
      sum_sq += v * v;
    }
    tree_.nodes[id].value = sum / static_cast<double>(n);
    const double sse = sum_sq - sum * sum / static_cast<double>(n);
    if (depth >= params_.max_depth || n < 2 * params_.min_leaf || !(sse > 1e-12 * std::max(1.0, sum_sq))) {
      return id;
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 0.0;
    std::vector<std::size_t> order(rows);
    for (auto f : rng_.sample(all_features_, mtry_)) {
      const auto col = x_.col(static_cast<Eigen::Index>(f));
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = col(static_cast<Eigen::Index>(a));
        const double xb = col(static_cast<Eigen::Index>(b));
        return xa < xb || (xa == xb && a < b);
      });
      double left_sum = 0.0;
      double left_sq = 0.0;
      for (std::size_t s = 1; s < n; ++s) {
        const double v = y_(static_cast<Eigen::Index>(order[s - 1]));
        left_sum += v;
        left_sq += v * v;
        if (s < params_.min_leaf || n - s < params_.min_leaf) continue;
        const double lo = col(static_cast<Eigen::Index>(order[s - 1]));
        const double hi = col(static_cast<Eigen::Index>(order[s]));
        if (!(lo < hi)) continue;
        const double ls = static_cast<double>(s);
        const double rs = static_cast<double>(n - s);
        const double right_sum = sum - left_sum;
        const double right_sq = sum_sq - left_sq;
        const double child_sse = (left_sq - left_sum * left_sum / ls) + (right_sq - right_sum * right_sum / rs);
        const double gain = sse - child_sse;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double mid = 0.5 * (lo + hi);
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto col = x_.col(best_feature);
    for (auto r : rows) (col(static_cast<Eigen::Index>(r)) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[id].feature = best_feature;
    tree_.nodes[id].threshold = best_threshold;
    const std::size_t l = grow(std::move(left), depth + 1);
    const std::size_t r = grow(std::move(right), depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const ForestParams& params_;
  Rng& rng_;
  std::vector<std::size_t> all_features_;
  std::size_t mtry_ = 1;
  RegressionTree tree_;
};

}  // namespace

Eigen::VectorXd ForestModel::predict(const FeatureTable& table) const {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x =
      table.select_columns(feature_names).values();
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x.row(i).data());
    out(i) = s / static_cast<double>(trees.size());
  }
  return out;
}

double ForestModel::predict_row(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(feature_names.size())) {
    throw Error(ErrorKind::column_mismatch, "row width does not match forest features");
  }
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(x.data());
  return s / static_cast<double>(trees.size());
}

ForestModel fit_forest(const FeatureTable& train, std::span<const std::string> features, std::string_view target,
                       const ForestParams& params) {
  if (features.empty()) throw Error(ErrorKind::invalid_argument, "forest needs at least one feature");
  if (train.rows() == 0) throw Error(ErrorKind::empty_table, "empty training table");
  if (params.n_trees == 0 || params.min_leaf == 0) {
    throw Error(ErrorKind::invalid_argument, "n_trees and min_leaf must be positive");
  }
  ForestModel model;
  model.feature_names.assign(features.begin(), features.end());
  model.target = std::string(target);
  model.params = params;
  model.trees.resize(params.n_trees);

  const Eigen::MatrixXd x = train.select_columns(model.feature_names).values();
  const Eigen::VectorXd y = train.column(target);
  const std::size_t n = train.rows();
  parallel_for(params.n_trees, params.jobs, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
    TreeBuilder builder(x, y, params, rng);
    model.trees[t] = builder.build(std::move(rows));
  });
  return model;
}

double r2_score(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() == 0) throw Error(ErrorKind::insufficient_data, "empty test set");
  if (y_true.size() != y_pred.size()) throw Error(ErrorKind::column_mismatch, "prediction length mismatch");
  const double mean = y_true.mean();
  const double ss_tot = (y_true.array() - mean).square().sum();
  if (ss_tot == 0.0) throw Error(ErrorKind::degenerate_target, "test target is constant");
  const double ss_res = (y_true - y_pred).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

double r2(const ForestModel& model, const FeatureTable& test) {
  return r2_score(test.column(model.target), model.predict(test));
}

AccuracyTrace accuracy_trace(const ActiveLearningRun& run, const FeatureTable& pool, const FeatureTable& test,
                             std::span<const std::string> features, std::string_view target,
                             const ForestParams& params) {
  AccuracyTrace out;
  for (std::size_t iter = 1; iter <= run.records.size(); ++iter) {
    std::vector<std::size_t> rows;
    for (const auto& id : run.snapshot(iter)) {
      const auto r = pool.find_row(id);
      if (!r) throw Error(ErrorKind::unknown_row, "selected row " + id + " is not in the pool");
      rows.push_back(*r);
    }
    std::sort(rows.begin(), rows.end());
    out.r2.push_back(r2(fit_forest(pool.select_rows(rows), features, target, params), test));
  }
  out.reference = r2(fit_forest(pool, features, target, params), test);
  return out;
}

void save_parity(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::missing_file, "cannot write " + path.string());
  out << "y_true,y_pred\n";
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    out << format_double(y_true(i)) << ',' << format_double(y_pred(i)) << '\n';
  }
}

}  // namespace causal_al
