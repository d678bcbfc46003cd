#pragma once

#include "sdigs/core/types.hpp"
#include "sdigs/splat/render.hpp"

#include <vector>

namespace sdigs {

// Photometric objective: sum over views and pixels of the squared RGB
// residual between the render and the reference image.
double photometric_loss(const GaussianSet& gaussians,
                        const std::vector<CameraView>& views,
                        const std::vector<PoseIncrement>& increments,
                        int threads = 1);

struct LossGradients {
  double loss = 0.0;
  RenderGrads params;                     // summed over all views
  std::vector<PoseIncrement> pose_grads;  // per view; entry 0 always zero
};

// Loss plus analytic gradients. Views render independently (optionally in
// parallel); per-view gradients are merged in view order so the result is
// independent of the thread count. The first view's pose gradient is zeroed:
// it anchors the global frame during pose refinement.
LossGradients photometric_loss_and_gradients(
    const GaussianSet& gaussians, const std::vector<CameraView>& views,
    const std::vector<PoseIncrement>& increments, bool pose_grads,
    int threads = 1);

}  // namespace sdigs
