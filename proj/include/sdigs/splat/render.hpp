#pragma once

#include "sdigs/core/types.hpp"
#include "sdigs/splat/gaussians.hpp"

#include <cstdint>
#include <vector>

namespace sdigs {

// Small camera-space correction optimized during training. The pose actually
// used for rendering view v is
//   x_cam = R(omega) * (R0 * x_world + t0) + delta_t
// where (R0, t0) is the view's base pose and R(omega) the axis-angle rotation.
struct PoseIncrement {
  Vec3 omega = Vec3::Zero();
  Vec3 delta_t = Vec3::Zero();
};

CameraPose composed_pose(const CameraPose& base, const PoseIncrement& inc);

struct RenderResult {
  Image color;                // alpha-composited over black
  std::vector<double> alpha;  // per-pixel 1 - T, row-major
};

// One screen-space splat surviving projection/culling, in depth order.
struct ProjectedSplat {
  int64_t gauss_index = 0;  // index into the GaussianSet
  double depth = 0.0;       // camera-space z
  Vec3 t_cam = Vec3::Zero();
  double cu = 0.0, cv = 0.0;    // projected center (pixels)
  double cov2d[3] = {0, 0, 0};  // dilated 2D covariance (a, b, c)
  double conic[3] = {0, 0, 0};  // inverse covariance (ca, cb, cc)
  double alpha = 0.0;           // sigmoid(opacity logit)
  double color[3] = {0, 0, 0};
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // clipped pixel bounds, inclusive
};

// Forward-pass state retained for the backward sweep.
struct RenderAux {
  int width = 0, height = 0;
  std::vector<ProjectedSplat> splats;  // sorted by (depth, gauss_index)
  std::vector<double> channel[3];      // composited color planes
  std::vector<double> transmittance;   // final T per pixel
  std::vector<int32_t> last_splat;     // depth-order index of last applied
                                       // splat per pixel, -1 if none
};

RenderResult render(const GaussianSet& gaussians, const CameraIntrinsics& k,
                    const CameraPose& pose);
RenderResult render_with_aux(const GaussianSet& gaussians,
                             const CameraIntrinsics& k, const CameraPose& pose,
                             RenderAux* aux);

// Parameter gradients, same flat layout as GaussianSet.
struct RenderGrads {
  std::vector<double> positions;       // 3n
  std::vector<double> log_scales;      // 3n
  std::vector<double> rotations;       // 4n
  std::vector<double> opacity_logits;  // n
  std::vector<double> colors;          // 3n
  Vec3 d_omega = Vec3::Zero();         // pose-increment gradients
  Vec3 d_delta_t = Vec3::Zero();

  void resize(int64_t n);
  void add(const RenderGrads& o);
};

// Accumulates d(loss)/d(parameters) given d(loss)/d(rendered color) for one
// view. `aux` must come from render_with_aux with the composed pose of
// (base, inc); pose gradients are filled only when `want_pose_grads` is set.
void render_backward(const GaussianSet& gaussians, const CameraIntrinsics& k,
                     const CameraPose& base, const PoseIncrement& inc,
                     const RenderAux& aux, const Image& grad_color,
                     RenderGrads* grads, bool want_pose_grads);

}  // namespace sdigs
