#include "seeds/decomposer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seeds/error.hpp"

namespace seeds::decomposer {

namespace {

Embedding mean_of(std::span<const Embedding> points, std::span<const std::size_t> members) {
  std::vector<double> sum(points.front().dim(), 0.0);
  for (std::size_t p : members)
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += points[p][i];
  for (double& v : sum) v /= static_cast<double>(members.size());
  return Embedding(std::move(sum));
}

}  // namespace

double boundary_margin(std::span<const double> point, const Embedding& own, const Embedding& other) {
  const double d_own = distance(point, own.values());
  const double d_other = distance(point, other.values());
  const double total = d_own + d_other;
  return total > 0.0 ? (d_other - d_own) / total : 0.0;
}

ClusterSplit filter_boundary(std::span<const Embedding> points, std::span<const std::size_t> ids,
                             const KMeansResult& clusters, double keep_fraction) {
  require(keep_fraction > 0.0 && keep_fraction <= 1.0, ErrorCode::PreconditionViolated,
          "keep_fraction must be in (0, 1]");
  require(points.size() == ids.size() && points.size() == clusters.assignment.size(), ErrorCode::DimMismatch,
          "points, ids and assignment differ in length");

  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t p = 0; p < points.size(); ++p) members[static_cast<std::size_t>(clusters.assignment[p])].push_back(p);
  require(!members[0].empty() && !members[1].empty(), ErrorCode::PreconditionViolated, "a k-means cluster is empty");

  ClusterSplit split;
  std::array<std::vector<std::size_t>, 2> survivors;
  for (std::size_t c = 0; c < 2; ++c) {
    const Embedding& own = clusters.centroids[c];
    const Embedding& other = clusters.centroids[1 - c];
    std::vector<double> margin(points.size(), 0.0);
    for (std::size_t p : members[c]) margin[p] = boundary_margin(points[p].values(), own, other);

    auto ranked = members[c];
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t x, std::size_t y) { return margin[x] > margin[y]; });
    // The epsilon keeps e.g. 0.7 * 10 from rounding up to 8.
    const double wanted = std::ceil(keep_fraction * static_cast<double>(ranked.size()) - 1e-9);
    const std::size_t keep = std::max<std::size_t>(1, std::min(ranked.size(), static_cast<std::size_t>(wanted)));

    survivors[c].assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(survivors[c].begin(), survivors[c].end());
    for (std::size_t i = keep; i < ranked.size(); ++i) split.discarded.push_back(ids[ranked[i]]);
  }

  const auto to_ids = [&](const std::vector<std::size_t>& positions) {
    std::vector<std::size_t> out;
    for (std::size_t p : positions) out.push_back(ids[p]);
    std::sort(out.begin(), out.end());
    return out;
  };
  split.indices_a = to_ids(survivors[0]);
  split.indices_b = to_ids(survivors[1]);
  std::sort(split.discarded.begin(), split.discarded.end());
  split.centroid_a = mean_of(points, survivors[0]);
  split.centroid_b = mean_of(points, survivors[1]);
  return split;
}

ClusterSplit swap_labels(const ClusterSplit& split) {
  return {split.indices_b, split.indices_a, split.centroid_b, split.centroid_a, split.discarded};
}

Embedding editing_direction(const ClusterSplit& split) {
  Embedding v = split.centroid_b - split.centroid_a;
  require(v.norm() >= 1e-9, ErrorCode::ZeroDirection, "cluster centroids coincide");
  return v;
}

std::pair<Embedding, Embedding> apply_edit(const Embedding& source, const Embedding& direction, double edit_step,
                                           bool renormalize) {
  require(source.dim() == direction.dim(), ErrorCode::DimMismatch, "source and direction dims differ");
  Embedding to_a = source - edit_step * direction;
  Embedding to_b = source + edit_step * direction;
  if (renormalize) {
    const double target = source.norm();
    const auto rescale = [target](const Embedding& e) {
      const double norm = e.norm();
      return norm > 0.0 ? (target / norm) * e : e;
    };
    to_a = rescale(to_a);
    to_b = rescale(to_b);
  }
  return {std::move(to_a), std::move(to_b)};
}

void validate(const DecomposeParams& params) {
  require(params.top_k >= 2, ErrorCode::PreconditionViolated, "top_k must be at least 2");
  require(std::isfinite(params.edit_step) && params.edit_step > 0.0, ErrorCode::PreconditionViolated,
          "edit_step must be positive");
  require(params.keep_fraction > 0.0 && params.keep_fraction <= 1.0, ErrorCode::PreconditionViolated,
          "keep_fraction must be in (0, 1]");
}

Decomposition decompose(const sae::SaeModel& model, const Embedding& source, const DecomposeParams& params) {
  validate(params);
  require(source.dim() == model.n(), ErrorCode::DimMismatch,
          "source dim " + std::to_string(source.dim()) + " != model n " + std::to_string(model.n()));
  require(params.top_k <= model.m(), ErrorCode::PreconditionViolated, "top_k exceeds the SAE feature count");

  const SparseActivation h = sae::encode(model, source);
  const std::vector<sae::Atom> atoms = sae::top_k_atoms(model, h, params.top_k);
  std::vector<Embedding> points;
  std::vector<std::size_t> ids;
  for (const auto& atom : atoms) {
    points.push_back(atom.direction);
    ids.push_back(atom.index);
  }

  KMeansResult clusters = kmeans2(points, params.rng_seed);
  // atoms[0] carries the highest activation; its cluster is A.
  if (clusters.assignment.front() == Cluster::B) {
    for (auto& c : clusters.assignment) c = c == Cluster::A ? Cluster::B : Cluster::A;
    std::swap(clusters.centroids[0], clusters.centroids[1]);
  }

  Decomposition d;
  d.source = source;
  d.split = filter_boundary(points, ids, clusters, params.keep_fraction);
  d.direction = editing_direction(d.split);
  d.edit_step = params.edit_step;
  std::tie(d.edited_a, d.edited_b) = apply_edit(source, d.direction, params.edit_step, params.renormalize);
  d.params = params;
  return d;
}

}  // namespace seeds::decomposer
