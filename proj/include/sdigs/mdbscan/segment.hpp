#pragma once

#include "sdigs/core/types.hpp"

#include <cstdint>
#include <vector>

namespace sdigs {

enum class Connectivity { four = 4, eight = 8 };

struct SegmentationParams {
  double color_eps = 0.08;  // RGB Euclidean radius for neighborhood tests
  int min_pts = 3;          // neighbors (excluding self) required for a core
  Connectivity connectivity = Connectivity::four;
};

// Dense label map. Labels are 0..num_segments-1, renumbered by row-major
// first encounter, so the segment containing pixel (0,0) is always 0.
struct SegmentationMap {
  int width = 0, height = 0;
  std::vector<int32_t> labels;
  int32_t num_segments = 0;

  int32_t at(int x, int y) const {
    return labels[static_cast<size_t>(y) * width + x];
  }
};

// Grid-restricted density clustering with deterministic noise absorption.
//
// 1. Core pixels: at least min_pts spatial neighbors within color_eps.
// 2. Clusters: connected components of core pixels under
//    (spatial adjacency AND color distance <= color_eps), seeded in
//    row-major order.
// 3. Absorption: synchronized rounds; every unlabeled pixel with a labeled
//    spatial neighbor within color_eps joins the label of the closest such
//    neighbor (distance ties -> lowest label), all decisions of a round
//    reading the labels from the round start.
// 4. Pixels that can never be absorbed within color_eps become new segments:
//    connected components under (spatial adjacency AND distance <= color_eps).
//
// Every segment is spatially connected and internally reachable through
// neighbor steps of color distance <= color_eps by construction.
SegmentationMap segment_image(const Image& image,
                              const SegmentationParams& params);

// Pixel count per label; index equals the label.
std::vector<int64_t> segment_sizes(const SegmentationMap& map);

}  // namespace sdigs
