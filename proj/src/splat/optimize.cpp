#include "sdigs/splat/optimize.hpp"

#include "sdigs/core/error.hpp"
#include "sdigs/kernels/kernels.hpp"
#include "sdigs/splat/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdigs {
namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_finite(bool ok, const char* group) {
  if (!ok) throw NumericalError("non-finite gradient", group);
}

// Adam first/second moment state for one parameter block.
struct Moments {
  std::vector<double> m, v;
  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

}  // namespace

double scene_extent(const GaussianSet& gaussians) {
  if (gaussians.count == 0) return 1.0;
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int64_t i = 0; i < gaussians.count; ++i) {
    const Vec3 p = gaussians.position(i);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  return diag > 0.0 ? diag : 1.0;
}

TrainResult optimize(GaussianSet& gaussians,
                     const std::vector<CameraView>& views,
                     const OptimizerConfig& config) {
  if (views.empty()) throw UsageError("optimize: no views");
  if (config.iterations < 0) throw UsageError("optimize: negative iterations");

  const int64_t n = gaussians.count;
  const size_t nviews = views.size();

  TrainResult result;
  result.scene_extent = scene_extent(gaussians);
  result.increments.assign(nviews, PoseIncrement{});
  result.loss_trace.reserve(static_cast<size_t>(config.iterations));

  Moments positions, scales, rotations, opacities, colors, poses;
  positions.init(static_cast<size_t>(3 * n));
  scales.init(static_cast<size_t>(3 * n));
  rotations.init(static_cast<size_t>(4 * n));
  opacities.init(static_cast<size_t>(n));
  colors.init(static_cast<size_t>(3 * n));
  poses.init(6 * nviews);
  std::vector<double> pose_params(6 * nviews, 0.0);
  std::vector<double> pose_grads(6 * nviews, 0.0);

  const kernels::Kernels& kr = kernels::active();
  const double lr_position = config.lr_position * result.scene_extent;

  for (int iter = 1; iter <= config.iterations; ++iter) {
    LossGradients lg = photometric_loss_and_gradients(
        gaussians, views, result.increments, config.refine_poses,
        config.threads);
    if (!std::isfinite(lg.loss))
      throw NumericalError("non-finite photometric loss", "loss");
    result.loss_trace.push_back(lg.loss);

    require_finite(all_finite(lg.params.positions), "position");
    require_finite(all_finite(lg.params.log_scales), "scale");
    require_finite(all_finite(lg.params.rotations), "rotation");
    require_finite(all_finite(lg.params.opacity_logits), "opacity");
    require_finite(all_finite(lg.params.colors), "color");

    const double bias1 = 1.0 / (1.0 - std::pow(config.beta1, iter));
    const double bias2 = 1.0 / (1.0 - std::pow(config.beta2, iter));
    auto step = [&](std::vector<double>& param, Moments& mom,
                    const std::vector<double>& grad, double lr) {
      kr.adam_step(param.data(), mom.m.data(), mom.v.data(), grad.data(),
                   param.size(), lr, config.beta1, config.beta2,
                   config.adam_eps, bias1, bias2);
    };
    step(gaussians.positions, positions, lg.params.positions, lr_position);
    step(gaussians.log_scales, scales, lg.params.log_scales, config.lr_scale);
    step(gaussians.rotations, rotations, lg.params.rotations,
         config.lr_rotation);
    step(gaussians.opacity_logits, opacities, lg.params.opacity_logits,
         config.lr_opacity);
    step(gaussians.colors, colors, lg.params.colors, config.lr_color);

    if (config.refine_poses) {
      for (size_t v = 0; v < nviews; ++v) {
        for (int a = 0; a < 3; ++a) {
          pose_grads[6 * v + a] = lg.pose_grads[v].omega[a];
          pose_grads[6 * v + 3 + a] = lg.pose_grads[v].delta_t[a];
        }
      }
      require_finite(all_finite(pose_grads), "pose");
      // View 1's gradient slots stay zero, so Adam leaves it untouched and
      // the global frame stays anchored.
      step(pose_params, poses, pose_grads, config.lr_pose);
      for (size_t v = 0; v < nviews; ++v) {
        for (int a = 0; a < 3; ++a) {
          result.increments[v].omega[a] = pose_params[6 * v + a];
          result.increments[v].delta_t[a] = pose_params[6 * v + 3 + a];
        }
      }
    }

    // Keep the parameterization well-posed after the unconstrained step.
    for (int64_t i = 0; i < n; ++i) {
      double* q = &gaussians.rotations[4 * i];
      const double norm =
          std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
      if (norm < 1e-12)
        throw NumericalError("rotation collapsed to zero", "rotation");
      for (int c = 0; c < 4; ++c) q[c] /= norm;
    }
    for (double& c : gaussians.colors) c = std::clamp(c, 0.0, 1.0);
  }

  result.refined_poses.resize(nviews);
  for (size_t v = 0; v < nviews; ++v)
    result.refined_poses[v] = composed_pose(views[v].pose, result.increments[v]);
  return result;
}

}  // namespace sdigs
