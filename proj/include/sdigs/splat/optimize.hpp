#pragma once

#include "sdigs/core/types.hpp"
#include "sdigs/splat/gaussians.hpp"
#include "sdigs/splat/render.hpp"

#include <vector>

namespace sdigs {

struct OptimizerConfig {
  int iterations = 300;
  // Position steps scale with the scene so the same rate works at any size.
  double lr_position = 1.6e-4;  // multiplied by scene_extent
  double lr_scale = 5e-3;
  double lr_rotation = 1e-3;
  double lr_opacity = 5e-2;
  double lr_color = 2.5e-3;
  double lr_pose = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool refine_poses = true;
  int threads = 1;
};

struct TrainResult {
  std::vector<double> loss_trace;          // loss before each step
  std::vector<PoseIncrement> increments;   // final per-view corrections
  std::vector<CameraPose> refined_poses;   // base poses with corrections applied
  double scene_extent = 0.0;
};

// Diagonal of the axis-aligned bounding box of the positions (1.0 when the
// cloud is empty or degenerate to a point).
double scene_extent(const GaussianSet& gaussians);

// Adam descent on all Gaussian parameters and (optionally) per-view pose
// corrections; view 1 stays fixed to pin the gauge. Quaternions are
// renormalized and colors clamped to [0, 1] after every step. Non-finite
// losses or gradients raise NumericalError naming the parameter group.
TrainResult optimize(GaussianSet& gaussians,
                     const std::vector<CameraView>& views,
                     const OptimizerConfig& config);

}  // namespace sdigs
