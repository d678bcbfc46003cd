#pragma once

#include "sdigs/core/types.hpp"
#include "sdigs/labeling/labeling.hpp"

#include <cstdint>
#include <vector>

namespace sdigs {

struct SamplerConfig {
  int64_t n_max = 512;  // per-cluster retention cap
  uint64_t seed = 0;
};

// min(n_max, |cluster|) distinct point ids, uniformly over subsets, returned
// ascending. The generator is keyed by (seed, cluster_ordinal) only, so a
// cluster's sample never depends on other clusters, and samples for growing
// n_max are nested. Throws UsageError for n_max < 1.
std::vector<int64_t> sample_cluster(const std::vector<int64_t>& cluster_points,
                                    int64_t n_max, uint64_t seed,
                                    int64_t cluster_ordinal);

// Stratified downsample of the union cloud: clusters visited in partition
// order, each contributing its sample; retained points keep ascending id
// order within a cluster.
struct FilteredCloud {
  PointCloud points;
  std::vector<int64_t> retained_indices;   // ids into the original cloud
  std::vector<int64_t> cluster_of_point;   // per retained point
  std::vector<int64_t> per_cluster_counts; // retained count per cluster

  size_t size() const { return retained_indices.size(); }
};

FilteredCloud downsample_clusters(const PointCloud& cloud,
                                  const ClusterPartition& partition,
                                  const SamplerConfig& config);

}  // namespace sdigs
