#pragma once

// Brute-force reference implementation of the grid density segmentation,
// written against the definition rather than for speed, and structured
// differently from the library (label-propagation fixpoints and whole-image
// scans instead of BFS and frontiers). Used by the unit tests and the
// acceptance suite to cross-check the real implementation.

#include "sdigs/core/types.hpp"
#include "sdigs/mdbscan/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

namespace sdigs::testing {

inline SegmentationMap segment_oracle(const Image& img,
                                      const SegmentationParams& params) {
  const int w = img.width, h = img.height;
  const int n = w * h;
  const double eps2 = params.color_eps * params.color_eps;

  auto dist2 = [&](int p, int q) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      double d = img.data[3 * p + c] - img.data[3 * q + c];
      s += d * d;
    }
    return s;
  };
  auto neighbors = [&](int p) {
    std::vector<int> out;
    int x = p % w, y = p / w;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (params.connectivity == Connectivity::four && dx != 0 && dy != 0)
          continue;
        int xn = x + dx, yn = y + dy;
        if (xn < 0 || xn >= w || yn < 0 || yn >= h) continue;
        out.push_back(yn * w + xn);
      }
    }
    return out;
  };

  // core pixels straight from the definition
  std::vector<bool> core(n, false);
  for (int p = 0; p < n; ++p) {
    int close = 0;
    for (int q : neighbors(p))
      if (dist2(p, q) <= eps2) ++close;
    core[p] = close >= params.min_pts;
  }

  // core components by min-index label propagation to a fixpoint
  std::vector<int> comp(n, -1);
  for (int p = 0; p < n; ++p)
    if (core[p]) comp[p] = p;
  for (bool changed = true; changed;) {
    changed = false;
    for (int p = 0; p < n; ++p) {
      if (!core[p]) continue;
      for (int q : neighbors(p)) {
        if (!core[q] || dist2(p, q) > eps2) continue;
        int m = std::min(comp[p], comp[q]);
        if (comp[p] != m || comp[q] != m) {
          comp[p] = comp[q] = m;
          changed = true;
        }
      }
    }
  }

  // rank phase-1 clusters by their minimum pixel index
  std::map<int, int32_t> rank;
  for (int p = 0; p < n; ++p)
    if (core[p]) rank.emplace(comp[p], 0);
  int32_t next_id = 0;
  for (auto& kv : rank) kv.second = next_id++;
  std::vector<int32_t> label(n, -1);
  for (int p = 0; p < n; ++p)
    if (core[p]) label[p] = rank.at(comp[p]);

  // synchronized absorption rounds via whole-image scans
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::pair<int, int32_t>> staged;
    for (int p = 0; p < n; ++p) {
      if (label[p] != -1) continue;
      double best = std::numeric_limits<double>::infinity();
      int32_t best_label = -1;
      for (int q : neighbors(p)) {
        if (label[q] == -1) continue;
        double d2 = dist2(p, q);
        if (d2 > eps2) continue;
        if (d2 < best || (d2 == best && label[q] < best_label)) {
          best = d2;
          best_label = label[q];
        }
      }
      if (best_label != -1) staged.emplace_back(p, best_label);
    }
    for (auto& [p, id] : staged) {
      label[p] = id;
      changed = true;
    }
  }

  // residual components, again by min-index propagation
  std::vector<int> rcomp(n, -1);
  for (int p = 0; p < n; ++p)
    if (label[p] == -1) rcomp[p] = p;
  for (bool changed = true; changed;) {
    changed = false;
    for (int p = 0; p < n; ++p) {
      if (rcomp[p] == -1) continue;
      for (int q : neighbors(p)) {
        if (rcomp[q] == -1 || dist2(p, q) > eps2) continue;
        int m = std::min(rcomp[p], rcomp[q]);
        if (rcomp[p] != m || rcomp[q] != m) {
          rcomp[p] = rcomp[q] = m;
          changed = true;
        }
      }
    }
  }
  std::map<int, int32_t> rrank;
  for (int p = 0; p < n; ++p)
    if (rcomp[p] != -1) rrank.emplace(rcomp[p], 0);
  for (auto& kv : rrank) kv.second = next_id++;
  for (int p = 0; p < n; ++p)
    if (rcomp[p] != -1) label[p] = rrank.at(rcomp[p]);

  // renumber by row-major first encounter
  SegmentationMap out;
  out.width = w;
  out.height = h;
  out.labels.assign(n, -1);
  std::vector<int32_t> remap(next_id, -1);
  int32_t fresh = 0;
  for (int p = 0; p < n; ++p) {
    if (remap[label[p]] == -1) remap[label[p]] = fresh++;
    out.labels[p] = remap[label[p]];
  }
  out.num_segments = fresh;
  return out;
}

// Random test image: blocky palette regions plus optional per-pixel noise,
// quantized to 1/8 steps so exact distance ties occur.
inline Image random_segmentation_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> palette(0, 7);
  std::uniform_int_distribution<int> block(2, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image img(w, h);
  int bw = block(rng), bh = block(rng);
  std::vector<Vec3> colors(64);
  for (auto& c : colors)
    c = Vec3(palette(rng) / 8.0, palette(rng) / 8.0, palette(rng) / 8.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int bi = (y / bh) * ((w + bw - 1) / bw) + (x / bw);
      Vec3 c = colors[bi % colors.size()];
      if (unit(rng) < 0.07) {
        c = Vec3(palette(rng) / 8.0, palette(rng) / 8.0, palette(rng) / 8.0);
      }
      img.set_pixel(x, y, c);
    }
  }
  return img;
}

}  // namespace sdigs::testing
