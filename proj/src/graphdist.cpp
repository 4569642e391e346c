#include "causal_al/graphdist.hpp"

#include "causal_al/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <functional>
#include <set>

namespace causal_al {

namespace {

// Embeds `dag` into the node universe `names` (missing nodes become zero rows/cols).
Eigen::MatrixXd aligned_weights(const WeightedDag& dag, const std::vector<std::string>& names) {
  const auto d = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  std::vector<Eigen::Index> pos(dag.size());
  for (std::size_t i = 0; i < dag.size(); ++i) {
    pos[i] = static_cast<Eigen::Index>(std::find(names.begin(), names.end(), dag.node_names()[i]) - names.begin());
  }
  for (std::size_t i = 0; i < dag.size(); ++i) {
    for (std::size_t j = 0; j < dag.size(); ++j) {
      w(pos[i], pos[j]) = dag.weights()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return w;
}

}  // namespace

Spectrum spectrum(const Eigen::MatrixXd& adjacency, std::size_t n, SpectrumMode mode) {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "spectrum length must be at least 1");
  std::vector<double> values;
  if (adjacency.size() > 0) {
    if (mode == SpectrumMode::singular_values) {
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(adjacency);
      const auto& s = svd.singularValues();
      values.assign(s.data(), s.data() + s.size());
    } else {
      try {
        // acyclic: triangular under a topological order, so the diagonal holds the eigenvalues
        topological_order(adjacency);
        for (Eigen::Index i = 0; i < adjacency.rows(); ++i) values.push_back(std::abs(adjacency(i, i)));
      } catch (const Error&) {
        const Eigen::EigenSolver<Eigen::MatrixXd> es(adjacency, false);
        for (const auto& ev : es.eigenvalues()) values.push_back(std::abs(ev));
      }
    }
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  Spectrum out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < std::min(n, values.size()); ++i) out.values(static_cast<Eigen::Index>(i)) = values[i];
  return out;
}

Spectrum spectrum(const WeightedDag& dag, std::size_t n, SpectrumMode mode) { return spectrum(dag.weights(), n, mode); }

double spectral_distance(const WeightedDag& a, const WeightedDag& b, std::optional<std::size_t> top_n,
                         SpectrumMode mode) {
  std::vector<std::string> names = a.node_names();
  const std::set<std::string> in_a(a.node_names().begin(), a.node_names().end());
  bool shared = false;
  for (const auto& n : b.node_names()) {
    if (in_a.contains(n)) {
      shared = true;
    } else {
      names.push_back(n);
    }
  }
  if (!shared && a.size() > 0 && b.size() > 0) {
    throw Error(ErrorKind::node_mismatch, "graphs share no node names");
  }
  const std::size_t n = top_n.value_or(std::max<std::size_t>(names.size(), 1));
  const Spectrum sa = spectrum(aligned_weights(a, names), n, mode);
  const Spectrum sb = spectrum(aligned_weights(b, names), n, mode);
  return (sa.values - sb.values).norm();
}

}  // namespace causal_al
