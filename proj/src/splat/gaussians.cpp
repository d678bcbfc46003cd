#include "sdigs/splat/gaussians.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdigs {

void GaussianSet::resize(int64_t n) {
  count = n;
  positions.assign(static_cast<size_t>(3 * n), 0.0);
  log_scales.assign(static_cast<size_t>(3 * n), 0.0);
  rotations.assign(static_cast<size_t>(4 * n), 0.0);
  opacity_logits.assign(static_cast<size_t>(n), 0.0);
  colors.assign(static_cast<size_t>(3 * n), 0.0);
}

std::vector<double> nearest3_mean_distances(const std::vector<Vec3>& points) {
  const int64_t n = static_cast<int64_t>(points.size());
  std::vector<double> result(points.size(), 1.0);
  if (n < 2) return result;

  const double inf = std::numeric_limits<double>::infinity();
  for (int64_t i = 0; i < n; ++i) {
    // Track the three smallest squared distances in one pass.
    double d0 = inf, d1 = inf, d2 = inf;
    for (int64_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (points[j] - points[i]).squaredNorm();
      if (d < d0) {
        d2 = d1;
        d1 = d0;
        d0 = d;
      } else if (d < d1) {
        d2 = d1;
        d1 = d;
      } else if (d < d2) {
        d2 = d;
      }
    }
    double sum = std::sqrt(d0);
    int used = 1;
    if (d1 < inf) {
      sum += std::sqrt(d1);
      ++used;
    }
    if (d2 < inf) {
      sum += std::sqrt(d2);
      ++used;
    }
    result[i] = sum / used;
  }
  return result;
}

GaussianSet init_gaussians(const PointCloud& cloud) {
  const int64_t n = static_cast<int64_t>(cloud.size());
  GaussianSet set;
  set.resize(n);
  if (n == 0) return set;

  const std::vector<double> mean_dist = nearest3_mean_distances(cloud.positions);
  // logit(0.1): opacities start low so overlapping splats can all learn.
  const double opacity_logit = std::log(0.1 / 0.9);

  for (int64_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      set.positions[3 * i + c] = cloud.positions[i][c];
      set.colors[3 * i + c] = std::clamp(cloud.colors[i][c], 0.0, 1.0);
    }
    const double scale = std::max(mean_dist[i], 1e-8);
    const double log_scale = std::log(scale);
    set.log_scales[3 * i + 0] = log_scale;
    set.log_scales[3 * i + 1] = log_scale;
    set.log_scales[3 * i + 2] = log_scale;
    set.rotations[4 * i + 0] = 1.0;  // identity quaternion (w, x, y, z)
    set.opacity_logits[i] = opacity_logit;
  }
  return set;
}

}  // namespace sdigs
