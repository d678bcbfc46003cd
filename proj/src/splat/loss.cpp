#include "sdigs/splat/loss.hpp"

#include "sdigs/core/error.hpp"
#include "sdigs/core/parallel.hpp"
#include "sdigs/kernels/kernels.hpp"

#include <vector>

namespace sdigs {
namespace {

void validate_inputs(const std::vector<CameraView>& views,
                     const std::vector<PoseIncrement>& increments) {
  if (views.empty()) throw UsageError("photometric loss: no views");
  if (increments.size() != views.size())
    throw UsageError("photometric loss: increment count != view count");
  for (const CameraView& v : views) {
    if (v.image.width != v.intrinsics.width ||
        v.image.height != v.intrinsics.height)
      throw UsageError("photometric loss: view image does not match intrinsics");
  }
}

}  // namespace

double photometric_loss(const GaussianSet& gaussians,
                        const std::vector<CameraView>& views,
                        const std::vector<PoseIncrement>& increments,
                        int threads) {
  validate_inputs(views, increments);
  const kernels::Kernels& kr = kernels::active();
  std::vector<double> per_view(views.size(), 0.0);
  parallel_for(static_cast<int64_t>(views.size()), threads, [&](int64_t v) {
    const CameraView& view = views[v];
    const RenderResult r = render(gaussians, view.intrinsics,
                                  composed_pose(view.pose, increments[v]));
    per_view[v] = kr.sq_diff_sum(r.color.data.data(), view.image.data.data(),
                                 r.color.data.size());
  });
  double loss = 0.0;
  for (double term : per_view) loss += term;  // fixed order: thread-count free
  return loss;
}

LossGradients photometric_loss_and_gradients(
    const GaussianSet& gaussians, const std::vector<CameraView>& views,
    const std::vector<PoseIncrement>& increments, bool pose_grads,
    int threads) {
  validate_inputs(views, increments);
  const kernels::Kernels& kr = kernels::active();
  const size_t nviews = views.size();

  std::vector<double> per_view_loss(nviews, 0.0);
  std::vector<RenderGrads> per_view(nviews);

  parallel_for(static_cast<int64_t>(nviews), threads, [&](int64_t v) {
    const CameraView& view = views[v];
    const CameraPose pose = composed_pose(view.pose, increments[v]);
    RenderAux aux;
    const RenderResult r =
        render_with_aux(gaussians, view.intrinsics, pose, &aux);
    per_view_loss[v] = kr.sq_diff_sum(r.color.data.data(),
                                      view.image.data.data(),
                                      r.color.data.size());
    // d(sum of squared residuals)/dC = 2 * (C - I).
    Image grad(view.intrinsics.width, view.intrinsics.height);
    for (size_t p = 0; p < grad.data.size(); ++p)
      grad.data[p] = 2.0 * (r.color.data[p] - view.image.data[p]);
    per_view[v].resize(gaussians.count);
    // View 1 anchors the gauge, so its pose gradient is never needed.
    const bool want_pose = pose_grads && v != 0;
    render_backward(gaussians, view.intrinsics, view.pose, increments[v], aux,
                    grad, &per_view[v], want_pose);
  });

  LossGradients out;
  out.params.resize(gaussians.count);
  out.pose_grads.assign(nviews, PoseIncrement{});
  for (size_t v = 0; v < nviews; ++v) {  // fixed merge order
    out.loss += per_view_loss[v];
    out.params.add(per_view[v]);
    if (pose_grads && v != 0) {
      out.pose_grads[v].omega = per_view[v].d_omega;
      out.pose_grads[v].delta_t = per_view[v].d_delta_t;
    }
  }
  // The merged pose slots are per-view quantities; the summed copies in
  // params are meaningless, so keep them zeroed.
  out.params.d_omega.setZero();
  out.params.d_delta_t.setZero();
  return out;
}

}  // namespace sdigs
