#include "sdigs/labeling/labeling.hpp"

#include "sdigs/core/camera.hpp"
#include "sdigs/core/error.hpp"
#include "sdigs/core/parallel.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace sdigs {

std::vector<int> context_views(int source_index, int total_views,
                               int dimension) {
  if (total_views < 1) {
    throw UsageError("context_views: need at least one view");
  }
  if (source_index < 1 || source_index > total_views) {
    throw UsageError("context_views: source ordinal " +
                     std::to_string(source_index) + " outside [1, " +
                     std::to_string(total_views) + "]");
  }
  if (dimension < 1) {
    throw UsageError("context_views: label dimension must be at least 1");
  }
  if (dimension > total_views) {
    throw UsageError("context_views: label dimension " +
                     std::to_string(dimension) + " exceeds view count " +
                     std::to_string(total_views));
  }
  std::vector<int> candidates;
  candidates.reserve(total_views - 1);
  for (int j = 1; j <= total_views; ++j) {
    if (j != source_index) candidates.push_back(j);
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    int da = std::abs(a - source_index), db = std::abs(b - source_index);
    return da != db ? da < db : a < b;
  });
  candidates.resize(dimension - 1);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

std::vector<LabelVector> label_cloud(
    const PointCloud& cloud, const std::vector<CameraView>& views,
    const std::vector<SegmentationMap>& segmentations, int dimension,
    int threads) {
  const int n_views = static_cast<int>(views.size());
  if (segmentations.size() != views.size()) {
    throw DataError("label_cloud: one segmentation per view required");
  }
  for (int k = 0; k < n_views; ++k) {
    if (views[k].index != k + 1) {
      throw DataError("label_cloud: view ordinals must be 1..N in order");
    }
    if (segmentations[k].width != views[k].intrinsics.width ||
        segmentations[k].height != views[k].intrinsics.height) {
      throw DataError("label_cloud: segmentation size mismatch for view " +
                      std::to_string(k + 1));
    }
  }
  // context lists per source ordinal, computed once
  std::vector<std::vector<int>> contexts(n_views);
  for (int i = 1; i <= n_views; ++i) {
    contexts[i - 1] = context_views(i, n_views, dimension);
  }

  std::vector<LabelVector> out(cloud.size());
  const int64_t points = static_cast<int64_t>(cloud.size());
  // chunked over points; every point writes only its own slot
  const int64_t chunk = 4096;
  const int64_t chunks = (points + chunk - 1) / chunk;
  parallel_for(chunks, threads, [&](int64_t ci) {
    for (int64_t p = ci * chunk; p < std::min(points, (ci + 1) * chunk); ++p) {
      int src = cloud.source_views[p];
      if (src < 1 || src > n_views) {
        throw DataError("label_cloud: point references unknown view ordinal " +
                        std::to_string(src));
      }
      const Pixel& px = cloud.source_pixels[p];
      LabelVector lv(dimension);
      lv[0] = segmentations[src - 1].at(px.x(), px.y());
      int slot = 1;
      for (int j : contexts[src - 1]) {
        const CameraView& view = views[j - 1];
        auto proj = project(cloud.positions[p], view.intrinsics, view.pose);
        int32_t label = kOutOfFrameLabel;
        if (proj && in_frame(proj->u, proj->v, view.intrinsics)) {
          Pixel q = round_pixel(proj->u, proj->v);
          label = segmentations[j - 1].at(q.x(), q.y());
        }
        lv[slot++] = label;
      }
      out[p] = std::move(lv);
    }
  });
  return out;
}

namespace {

struct LabelVectorHash {
  size_t operator()(const LabelVector& v) const {
    // FNV-1a over the raw label words
    uint64_t h = 1469598103934665603ull;
    for (int32_t x : v) {
      uint32_t u = static_cast<uint32_t>(x);
      for (int b = 0; b < 4; ++b) {
        h ^= (u >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return static_cast<size_t>(h);
  }
};

}  // namespace

ClusterPartition build_partition(const std::vector<LabelVector>& labels) {
  ClusterPartition part;
  part.point_cluster.resize(labels.size());
  std::unordered_map<LabelVector, int64_t, LabelVectorHash> index;
  index.reserve(labels.size() * 2);
  std::vector<std::vector<int64_t>> groups;
  for (int64_t p = 0; p < static_cast<int64_t>(labels.size()); ++p) {
    auto [it, inserted] = index.try_emplace(labels[p], groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(p);
  }
  // order clusters by lexicographic key
  std::vector<const LabelVector*> keys(groups.size());
  for (const auto& kv : index) keys[kv.second] = &kv.first;
  std::vector<int64_t> order(groups.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int64_t>(i);
  std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    return *keys[a] < *keys[b];
  });
  part.cluster_keys.reserve(groups.size());
  part.cluster_points.reserve(groups.size());
  for (size_t rank = 0; rank < order.size(); ++rank) {
    int64_t g = order[rank];
    part.cluster_keys.push_back(*keys[g]);
    part.cluster_points.push_back(std::move(groups[g]));
    for (int64_t p : part.cluster_points.back()) {
      part.point_cluster[p] = static_cast<int64_t>(rank);
    }
  }
  return part;
}

}  // namespace sdigs
