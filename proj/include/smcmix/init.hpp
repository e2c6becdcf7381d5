#pragma once

// EM starting points: k-means on per-subject mean sojourn times, then
// moment estimates inside each cluster.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "smcmix/core.hpp"

namespace smcmix {

/// Row i holds subject i's mean sojourn in each state, pooled over
/// replications; unvisited states (and the absorbing state) are 0.
Matrix mean_sojourn_features(const Panel& panel);

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double sse = 0.0;
  /// Within-cluster SSE after each assignment step of the winning restart.
  std::vector<double> sse_trace;
};

/// Lloyd iterations from k-means++ seeds, best of `restarts` runs. Every
/// cluster is non-empty. Deterministic for a given seed.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t restarts = 10);

struct InitOptions {
  std::size_t restarts = 10;
  std::size_t min_obs_mass = 7;
  /// Added to every structurally allowed initial/transition cell.
  double smoothing = 1e-6;
};

struct Initialization {
  MixtureModel model;
  /// Hard k-means labels the model was built from.
  std::vector<std::size_t> labels;
};

Initialization initialize(const Panel& panel, std::size_t components, std::uint64_t seed,
                          const InitOptions& options = {});

MixtureModel initial_model(const Panel& panel, std::size_t components, std::uint64_t seed,
                           const InitOptions& options = {});

}  // namespace smcmix
