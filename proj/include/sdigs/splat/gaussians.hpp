#pragma once

#include "sdigs/core/types.hpp"

#include <cstdint>
#include <vector>

namespace sdigs {

// Flat-array (structure-of-arrays) Gaussian parameter storage, so optimizer
// kernels can treat every parameter group as one contiguous double block.
struct GaussianSet {
  int64_t count = 0;
  std::vector<double> positions;       // 3n, world xyz
  std::vector<double> log_scales;      // 3n
  std::vector<double> rotations;       // 4n, unit quaternion (w,x,y,z)
  std::vector<double> opacity_logits;  // n
  std::vector<double> colors;          // 3n, RGB in [0,1]

  void resize(int64_t n);
  Eigen::Map<const Vec3> position(int64_t i) const {
    return Eigen::Map<const Vec3>(&positions[3 * i]);
  }
  Eigen::Map<const Vec3> log_scale(int64_t i) const {
    return Eigen::Map<const Vec3>(&log_scales[3 * i]);
  }
  Eigen::Map<const Vec4> rotation(int64_t i) const {
    return Eigen::Map<const Vec4>(&rotations[4 * i]);
  }
  Eigen::Map<const Vec3> color(int64_t i) const {
    return Eigen::Map<const Vec3>(&colors[3 * i]);
  }
};

// One isotropic Gaussian per cloud point: position and color copied, identity
// rotation, opacity 0.1 (as a logit), and scale set to the mean distance to
// the point's three nearest neighbors (fewer for clouds below four points;
// 1.0 for a singleton). Scales are floored at 1e-8 before the log.
GaussianSet init_gaussians(const PointCloud& cloud);

// Mean distance to the up-to-three nearest neighbors, exposed for testing.
std::vector<double> nearest3_mean_distances(const std::vector<Vec3>& points);

}  // namespace sdigs
