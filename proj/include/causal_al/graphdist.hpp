#pragma once

#include "causal_al/causal.hpp"

#include <Eigen/Core>

#include <optional>

namespace causal_al {

enum class SpectrumMode {
  singular_values,        // default: real, ordered, permutation invariant
  eigenvalue_magnitudes,  // |eigenvalues| of B; all zero for a DAG, kept for comparison
};

/// Top values of a graph's weighted adjacency, sorted descending and
/// zero-padded (or truncated) to the requested length.
struct Spectrum {
  Eigen::VectorXd values;
};

Spectrum spectrum(const Eigen::MatrixXd& adjacency, std::size_t n, SpectrumMode mode = SpectrumMode::singular_values);
Spectrum spectrum(const WeightedDag& dag, std::size_t n, SpectrumMode mode = SpectrumMode::singular_values);

/// Adjacency spectral distance: l2 norm of the difference of the two top-N
/// spectra. Graphs are aligned by node name over the union of their nodes;
/// `top_n` defaults to the size of that union. Graphs with no node name in
/// common raise NodeMismatch.
double spectral_distance(const WeightedDag& a, const WeightedDag& b, std::optional<std::size_t> top_n = std::nullopt,
                         SpectrumMode mode = SpectrumMode::singular_values);

}  // namespace causal_al
