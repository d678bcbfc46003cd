#include "sdigs/downsample/downsample.hpp"

#include "sdigs/core/error.hpp"
#include "sdigs/core/rng.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace sdigs {
namespace {

// Unbiased bounded uniform via rejection; avoids std::uniform_int_distribution
// whose output is not pinned down by the standard.
uint64_t uniform_below(std::mt19937_64& rng, uint64_t n) {
  uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

}  // namespace

std::vector<int64_t> sample_cluster(const std::vector<int64_t>& cluster_points,
                                    int64_t n_max, uint64_t seed,
                                    int64_t cluster_ordinal) {
  if (n_max < 1) {
    throw UsageError("sample_cluster: n_max must be at least 1");
  }
  const int64_t n = static_cast<int64_t>(cluster_points.size());
  const int64_t k = std::min(n_max, n);
  if (k == n) {
    std::vector<int64_t> all(cluster_points);
    std::sort(all.begin(), all.end());
    return all;
  }
  // per-cluster stream keyed by (seed, ordinal) only
  std::mt19937_64 rng(
      splitmix64(splitmix64(seed) ^
                 splitmix64(static_cast<uint64_t>(cluster_ordinal))));
  std::vector<int64_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates: the first k slots end as a uniform k-subset
  for (int64_t i = 0; i < k; ++i) {
    int64_t j = i + static_cast<int64_t>(
                        uniform_below(rng, static_cast<uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  std::vector<int64_t> out(k);
  for (int64_t i = 0; i < k; ++i) out[i] = cluster_points[idx[i]];
  std::sort(out.begin(), out.end());
  return out;
}

FilteredCloud downsample_clusters(const PointCloud& cloud,
                                  const ClusterPartition& partition,
                                  const SamplerConfig& config) {
  FilteredCloud out;
  out.per_cluster_counts.reserve(partition.cluster_count());
  for (size_t c = 0; c < partition.cluster_count(); ++c) {
    auto kept = sample_cluster(partition.cluster_points[c], config.n_max,
                               config.seed, static_cast<int64_t>(c));
    out.per_cluster_counts.push_back(static_cast<int64_t>(kept.size()));
    for (int64_t p : kept) {
      out.retained_indices.push_back(p);
      out.cluster_of_point.push_back(static_cast<int64_t>(c));
      out.points.positions.push_back(cloud.positions[p]);
      out.points.colors.push_back(cloud.colors[p]);
      out.points.source_views.push_back(cloud.source_views[p]);
      out.points.source_pixels.push_back(cloud.source_pixels[p]);
    }
  }
  return out;
}

}  // namespace sdigs
