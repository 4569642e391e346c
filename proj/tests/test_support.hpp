#pragma once

#include "causal_al/dataio.hpp"

#include <Eigen/Core>

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace test_support {

/// 64-bit LCG shared with the Python oracles, so both sides see identical doubles.
struct Lcg {
  std::uint64_t state;
  explicit Lcg(std::uint64_t seed) : state(seed) {}
  double next() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  double symmetric() { return 2.0 * next() - 1.0; }
};

/// x1 -> x2 -> x3, x1 -> x4 <- x3, x2 -> y <- x4 with uniform noise, columns
/// stored as x3, y, x1, x4, x2.
inline causal_al::FeatureTable five_node_table(std::size_t n, std::uint64_t seed) {
  Lcg g(seed);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), 5);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = g.symmetric();
    const double x2 = 0.8 * x1 + g.symmetric();
    const double x3 = -0.6 * x2 + g.symmetric();
    const double x4 = 0.5 * x1 + 0.7 * x3 + g.symmetric();
    const double y = 0.9 * x2 - 0.4 * x4 + g.symmetric();
    v.row(static_cast<Eigen::Index>(i)) << x3, y, x1, x4, x2;
    ids.push_back("r" + std::to_string(i));
  }
  return causal_al::FeatureTable(ids, {"x3", "y", "x1", "x4", "x2"}, v, {"y"});
}

/// Deterministic 100 x 10 matrix with correlated columns.
inline Eigen::MatrixXd lcg_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Lcg g(seed);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double carry = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      carry = 0.6 * carry + g.symmetric() * static_cast<double>(j + 1);
      m(i, j) = carry;
    }
  }
  return m;
}

/// Two boxes of uniform points in 2-D, centered at (-2, 0) and (3, 1).
inline causal_al::FeatureTable two_cluster_table(std::size_t per_cluster, std::uint64_t seed) {
  Lcg g(seed);
  const std::size_t n = 2 * per_cluster;
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), 2);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    const bool second = i % 2 == 1;
    v(static_cast<Eigen::Index>(i), 0) = (second ? 3.0 : -2.0) + g.symmetric();
    v(static_cast<Eigen::Index>(i), 1) = (second ? 1.0 : 0.0) + 0.8 * g.symmetric();
    ids.push_back("p" + std::to_string(i));
  }
  return causal_al::FeatureTable(ids, {"a", "b"}, v);
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("causal_al_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& f) const { return path / f; }
};

}  // namespace test_support
