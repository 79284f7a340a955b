#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seeds/sae.hpp"
#include "seeds/tensor.hpp"

namespace seeds::decomposer {

enum class Cluster : std::uint8_t { A = 0, B = 1 };

struct KMeansResult {
  std::vector<Cluster> assignment;
  std::array<Embedding, 2> centroids;
  double sse = 0.0;
};

inline constexpr int kKMeansRestarts = 32;
inline constexpr int kKMeansMaxIterations = 100;

// 2-means: Lloyd iterations from k-means++ seeding followed by single-point
// (Hartigan) transfers, best of kKMeansRestarts restarts by within-cluster
// sum of squares (lowest restart index on ties).
// Restarts run in parallel; the result depends only on (points, rng_seed).
KMeansResult kmeans2(std::span<const Embedding> points, std::uint64_t rng_seed);

// Single restart, exposed for the benchmark and tests.
KMeansResult kmeans2_single(std::span<const Embedding> points, std::uint64_t restart_seed);

// Sum of squared distances from each point to the mean of its cluster.
double partition_sse(std::span<const Embedding> points, std::span<const Cluster> assignment);

struct ClusterSplit {
  std::vector<std::size_t> indices_a;  // SAE feature indices, ascending
  std::vector<std::size_t> indices_b;
  Embedding centroid_a;
  Embedding centroid_b;
  std::vector<std::size_t> discarded;
};

// Keeps, per cluster, the max(1, ceil(keep_fraction * size)) points with the
// largest relative margin (d_other - d_own) / (d_other + d_own); centroids of
// the result are the means of the survivors. `ids[i]` labels points[i].
ClusterSplit filter_boundary(std::span<const Embedding> points, std::span<const std::size_t> ids,
                             const KMeansResult& clusters, double keep_fraction);

// Relative margin of a point given its own and the other centroid.
double boundary_margin(std::span<const double> point, const Embedding& own, const Embedding& other);

// Exchanges the roles of the two clusters.
ClusterSplit swap_labels(const ClusterSplit& split);

// centroid_b - centroid_a; throws ZeroDirection when its norm is below 1e-9.
Embedding editing_direction(const ClusterSplit& split);

// (source - step * direction, source + step * direction), optionally each
// rescaled to the Euclidean norm of source.
std::pair<Embedding, Embedding> apply_edit(const Embedding& source, const Embedding& direction, double edit_step,
                                           bool renormalize);

struct DecomposeParams {
  std::size_t top_k = 32;
  double edit_step = 0.5;
  double keep_fraction = 0.7;
  bool renormalize = true;
  std::uint64_t rng_seed = 0;

  bool operator==(const DecomposeParams&) const = default;
};

inline constexpr std::array<double, 2> kEditStepPresets = {0.5, 1.0};

void validate(const DecomposeParams& params);

struct Decomposition {
  Embedding source;
  ClusterSplit split;
  Embedding direction;
  double edit_step = 0.0;
  Embedding edited_a;
  Embedding edited_b;
  DecomposeParams params;
};

// encode -> top-k atoms -> kmeans2 -> filter_boundary -> direction -> edit.
// Cluster A is the cluster holding the most activated atom.
Decomposition decompose(const sae::SaeModel& model, const Embedding& source, const DecomposeParams& params);

}  // namespace seeds::decomposer
