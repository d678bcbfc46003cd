#pragma once

#include "sdigs/core/types.hpp"
#include "sdigs/mdbscan/segment.hpp"

#include <cstdint>
#include <vector>

namespace sdigs {

// One multi-view segmentation label vector per point. Entry 0 is the point's
// segment in its own source view; entries 1..D-1 are the segment labels seen
// from the context views in ascending view order, or kOutOfFrameLabel when
// the point is behind that camera or lands outside its frame.
using LabelVector = std::vector<int32_t>;

inline constexpr int32_t kOutOfFrameLabel = -1;

// The D-1 context view ordinals for a source view: nearest by ordinal
// distance |j - i|, distance ties resolved toward the lower ordinal, result
// sorted ascending. Ordinals are 1-based. The sets are nested as the
// dimension grows. Throws UsageError for dimension < 1, dimension >
// total_views, or a source ordinal outside [1, total_views].
std::vector<int> context_views(int source_index, int total_views,
                               int dimension);

// Label vectors for every point of the union cloud. `views` must hold the
// selected views with ordinals 1..N in order, `segmentations` their per-view
// segment maps (same order, matching image sizes).
std::vector<LabelVector> label_cloud(
    const PointCloud& cloud, const std::vector<CameraView>& views,
    const std::vector<SegmentationMap>& segmentations, int dimension,
    int threads = 1);

// Clusters of identical label vectors. Grouping compares raw tuples across
// the whole cloud, so points from different source views whose vectors
// coincide share a cluster; this is what makes repeated structures (and the
// backdrop in particular) collapse across views. Clusters are ordered by
// lexicographically ascending key; point ids ascend within each cluster.
struct ClusterPartition {
  std::vector<LabelVector> cluster_keys;
  std::vector<std::vector<int64_t>> cluster_points;
  std::vector<int64_t> point_cluster;  // point id -> cluster index

  size_t cluster_count() const { return cluster_keys.size(); }
};

ClusterPartition build_partition(const std::vector<LabelVector>& labels);

}  // namespace sdigs
