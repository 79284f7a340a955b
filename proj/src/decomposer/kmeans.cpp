#include <algorithm>
#include <limits>
#include <random>

#include "seeds/decomposer.hpp"
#include "seeds/error.hpp"
#include "seeds/kernels.hpp"

namespace seeds::decomposer {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::array<Embedding, 2> cluster_means(std::span<const Embedding> points, std::span<const Cluster> assignment) {
  const std::size_t dim = points.front().dim();
  std::array<std::vector<double>, 2> sums{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  std::array<std::size_t, 2> counts{0, 0};
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto c = static_cast<std::size_t>(assignment[p]);
    ++counts[c];
    for (std::size_t i = 0; i < dim; ++i) sums[c][i] += points[p][i];
  }
  for (std::size_t c = 0; c < 2; ++c)
    for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
  return {Embedding(std::move(sums[0])), Embedding(std::move(sums[1]))};
}

void check_points(std::span<const Embedding> points) {
  require(points.size() >= 2, ErrorCode::DegenerateInput, "k-means needs at least 2 points");
  const std::size_t dim = points.front().dim();
  bool distinct = false;
  for (const auto& p : points) {
    require(p.dim() == dim, ErrorCode::DimMismatch, "k-means points differ in dim");
    distinct = distinct || p != points.front();
  }
  require(distinct, ErrorCode::DegenerateInput, "all k-means points are identical");
}

// Single-point transfers (Hartigan): moving p from cluster C (size nc) to D
// (size nd) changes the SSE by nd/(nd+1)|p-cD|^2 - nc/(nc-1)|p-cC|^2.
// Lloyd fixed points can still admit such a move; apply them until none
// lowers the SSE. Clusters never drop below one member.
void hartigan_refine(std::span<const Embedding> points, std::vector<Cluster>& assignment) {
  const std::size_t n = points.size();
  for (std::size_t sweep = 0; sweep < 4 * n + 8; ++sweep) {
    bool moved = false;
    for (std::size_t p = 0; p < n; ++p) {
      const auto means = cluster_means(points, assignment);
      std::array<std::size_t, 2> counts{0, 0};
      for (auto c : assignment) ++counts[static_cast<std::size_t>(c)];
      const auto own = static_cast<std::size_t>(assignment[p]);
      const std::size_t other = 1 - own;
      if (counts[own] < 2) continue;
      const double nc = static_cast<double>(counts[own]);
      const double nd = static_cast<double>(counts[other]);
      const double gain = nc / (nc - 1.0) * squared_distance(points[p].values(), means[own].values());
      const double cost = nd / (nd + 1.0) * squared_distance(points[p].values(), means[other].values());
      if (cost < gain * (1.0 - 1e-12)) {
        assignment[p] = static_cast<Cluster>(other);
        moved = true;
      }
    }
    if (!moved) break;
  }
}

}  // namespace

double partition_sse(std::span<const Embedding> points, std::span<const Cluster> assignment) {
  require(points.size() == assignment.size(), ErrorCode::DimMismatch, "assignment length != point count");
  bool has_a = false, has_b = false;
  for (auto c : assignment) (c == Cluster::A ? has_a : has_b) = true;
  require(has_a && has_b, ErrorCode::PreconditionViolated, "both clusters must be non-empty");
  const auto means = cluster_means(points, assignment);
  double sse = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p)
    sse += squared_distance(points[p].values(), means[static_cast<std::size_t>(assignment[p])].values());
  return sse;
}

KMeansResult kmeans2_single(std::span<const Embedding> points, std::uint64_t restart_seed) {
  check_points(points);
  const std::size_t n = points.size();
  std::mt19937_64 rng(restart_seed);

  // k-means++ seeding: first centre uniform, second proportional to D^2.
  const std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::vector<double> weights(n);
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) total += weights[p] = squared_distance(points[p].values(), points[first].values());
  if (total == 0.0) {
    fail(ErrorCode::DegenerateInput, "all k-means points are identical");
  }
  const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
  std::size_t second = n;
  double cumulative = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (weights[p] == 0.0) continue;
    cumulative += weights[p];
    second = p;
    if (cumulative > target) break;
  }

  std::array<Embedding, 2> centroids{points[first], points[second]};
  std::vector<Cluster> assignment(n, Cluster::A);
  std::vector<Cluster> previous;
  for (int iter = 0; iter < kKMeansMaxIterations; ++iter) {
    std::vector<double> own_distance(n);
    for (std::size_t p = 0; p < n; ++p) {
      const double da = squared_distance(points[p].values(), centroids[0].values());
      const double db = squared_distance(points[p].values(), centroids[1].values());
      assignment[p] = db < da ? Cluster::B : Cluster::A;
      own_distance[p] = db < da ? db : da;
    }
    // An empty cluster takes the point farthest from its centroid.
    for (Cluster empty : {Cluster::A, Cluster::B}) {
      if (std::find(assignment.begin(), assignment.end(), empty) != assignment.end()) continue;
      std::size_t far = 0;
      for (std::size_t p = 1; p < n; ++p)
        if (own_distance[p] > own_distance[far]) far = p;
      assignment[far] = empty;
    }
    if (assignment == previous) break;
    centroids = cluster_means(points, assignment);
    previous = assignment;
  }

  hartigan_refine(points, assignment);

  KMeansResult result;
  result.assignment = std::move(assignment);
  result.centroids = cluster_means(points, result.assignment);
  result.sse = partition_sse(points, result.assignment);
  return result;
}

KMeansResult kmeans2(std::span<const Embedding> points, std::uint64_t rng_seed) {
  check_points(points);
  std::vector<KMeansResult> runs(kKMeansRestarts);
  kernels::parallel::for_each_index(runs.size(), [&](std::size_t r) {
    runs[r] = kmeans2_single(points, splitmix64(rng_seed + r));
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].sse < runs[best].sse) best = r;
  return std::move(runs[best]);
}

}  // namespace seeds::decomposer
