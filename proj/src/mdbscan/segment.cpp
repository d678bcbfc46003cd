#include "sdigs/mdbscan/segment.hpp"

#include "sdigs/core/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sdigs {
namespace {

struct NeighborTable {
  std::array<int, 8> dx{}, dy{};
  int count = 0;
};

NeighborTable neighbors_for(Connectivity c) {
  NeighborTable t;
  // row-major visiting order: up-left .. down-right
  const int d8x[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
  const int d8y[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  const int d4x[4] = {0, -1, 1, 0};
  const int d4y[4] = {-1, 0, 0, 1};
  if (c == Connectivity::four) {
    t.count = 4;
    for (int i = 0; i < 4; ++i) {
      t.dx[i] = d4x[i];
      t.dy[i] = d4y[i];
    }
  } else {
    t.count = 8;
    for (int i = 0; i < 8; ++i) {
      t.dx[i] = d8x[i];
      t.dy[i] = d8y[i];
    }
  }
  return t;
}

inline double color_dist2(const double* img, size_t a, size_t b) {
  double dr = img[3 * a] - img[3 * b];
  double dg = img[3 * a + 1] - img[3 * b + 1];
  double db = img[3 * a + 2] - img[3 * b + 2];
  return dr * dr + dg * dg + db * db;
}

}  // namespace

SegmentationMap segment_image(const Image& image,
                              const SegmentationParams& params) {
  if (image.width <= 0 || image.height <= 0 ||
      image.data.size() != static_cast<size_t>(image.width) * image.height * 3) {
    throw UsageError("segment_image: empty or malformed image");
  }
  if (!(params.color_eps >= 0.0)) {
    throw UsageError("segment_image: color_eps must be non-negative");
  }
  if (params.min_pts < 1) {
    throw UsageError("segment_image: min_pts must be at least 1");
  }

  const int w = image.width, h = image.height;
  const size_t n = static_cast<size_t>(w) * h;
  const double eps2 = params.color_eps * params.color_eps;
  const NeighborTable nb = neighbors_for(params.connectivity);
  const double* img = image.data.data();

  auto for_each_neighbor = [&](size_t p, auto&& fn) {
    int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
    for (int i = 0; i < nb.count; ++i) {
      int xn = x + nb.dx[i], yn = y + nb.dy[i];
      if (xn < 0 || xn >= w || yn < 0 || yn >= h) continue;
      fn(static_cast<size_t>(yn) * w + xn);
    }
  };

  // --- phase 1: core pixels and core clusters ---
  std::vector<uint8_t> core(n, 0);
  for (size_t p = 0; p < n; ++p) {
    int close = 0;
    for_each_neighbor(p, [&](size_t q) {
      if (color_dist2(img, p, q) <= eps2) ++close;
    });
    core[p] = close >= params.min_pts ? 1 : 0;
  }

  constexpr int32_t kUnlabeled = -1;
  std::vector<int32_t> label(n, kUnlabeled);
  int32_t next_label = 0;
  std::vector<size_t> stack;
  for (size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || label[seed] != kUnlabeled) continue;
    int32_t id = next_label++;
    label[seed] = id;
    stack.assign(1, seed);
    while (!stack.empty()) {
      size_t p = stack.back();
      stack.pop_back();
      for_each_neighbor(p, [&](size_t q) {
        if (core[q] && label[q] == kUnlabeled && color_dist2(img, p, q) <= eps2) {
          label[q] = id;
          stack.push_back(q);
        }
      });
    }
  }

  // --- phase 2: synchronized absorption rounds ---
  // frontier: unlabeled pixels that might now have a labeled neighbor
  std::vector<size_t> frontier;
  for (size_t p = 0; p < n; ++p) {
    if (label[p] != kUnlabeled) continue;
    bool near_labeled = false;
    for_each_neighbor(p, [&](size_t q) {
      if (label[q] != kUnlabeled) near_labeled = true;
    });
    if (near_labeled) frontier.push_back(p);
  }

  std::vector<std::pair<size_t, int32_t>> staged;
  std::vector<size_t> next_frontier;
  while (!frontier.empty()) {
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()),
                   frontier.end());
    staged.clear();
    for (size_t p : frontier) {
      if (label[p] != kUnlabeled) continue;
      double best_d2 = std::numeric_limits<double>::infinity();
      int32_t best_label = kUnlabeled;
      for_each_neighbor(p, [&](size_t q) {
        if (label[q] == kUnlabeled) return;
        double d2 = color_dist2(img, p, q);
        if (d2 > eps2) return;
        if (d2 < best_d2 || (d2 == best_d2 && label[q] < best_label)) {
          best_d2 = d2;
          best_label = label[q];
        }
      });
      if (best_label != kUnlabeled) staged.emplace_back(p, best_label);
    }
    if (staged.empty()) break;
    next_frontier.clear();
    for (auto& [p, id] : staged) label[p] = id;
    for (auto& [p, id] : staged) {
      (void)id;
      for_each_neighbor(p, [&](size_t q) {
        if (label[q] == kUnlabeled) next_frontier.push_back(q);
      });
    }
    frontier.swap(next_frontier);
  }

  // --- phase 3: residual pixels become their own segments ---
  for (size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != kUnlabeled) continue;
    int32_t id = next_label++;
    label[seed] = id;
    stack.assign(1, seed);
    while (!stack.empty()) {
      size_t p = stack.back();
      stack.pop_back();
      for_each_neighbor(p, [&](size_t q) {
        if (label[q] == kUnlabeled && color_dist2(img, p, q) <= eps2) {
          label[q] = id;
          stack.push_back(q);
        }
      });
    }
  }

  // --- renumber by row-major first encounter ---
  SegmentationMap out;
  out.width = w;
  out.height = h;
  out.labels.resize(n);
  std::vector<int32_t> remap(next_label, kUnlabeled);
  int32_t fresh = 0;
  for (size_t p = 0; p < n; ++p) {
    int32_t& m = remap[label[p]];
    if (m == kUnlabeled) m = fresh++;
    out.labels[p] = m;
  }
  out.num_segments = fresh;
  return out;
}

std::vector<int64_t> segment_sizes(const SegmentationMap& map) {
  std::vector<int64_t> sizes(map.num_segments, 0);
  for (int32_t l : map.labels) sizes[l]++;
  return sizes;
}

}  // namespace sdigs
