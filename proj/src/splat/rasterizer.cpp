#include "sdigs/splat/render.hpp"

#include "sdigs/core/camera.hpp"
#include "sdigs/core/error.hpp"
#include "sdigs/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace sdigs {
namespace {

// Projection chain intermediates kept alongside the public splat record; the
// backward pass recomputes them (same code, same inputs) instead of storing
// them for every splat of every view.
struct ProjectionFull {
  ProjectedSplat pub;
  double qnorm = 0.0;
  Vec4 qn = Vec4::Zero();  // unit quaternion (w, x, y, z)
  Mat3 R3 = Mat3::Identity();
  Vec3 s = Vec3::Zero();           // exp(log_scales)
  Mat3 M = Mat3::Zero();           // R3 * diag(s)
  Mat3 Sw = Mat3::Zero();          // world covariance M * M^T
  Eigen::Matrix<double, 2, 3> J;   // perspective Jacobian at t_cam
  Eigen::Matrix<double, 2, 3> B;   // J * W
};

Mat3 rotation_from_unit_quat(const Vec4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

// d(rotation)/d(unit quaternion component), evaluated at the unit quaternion.
void quat_rotation_partials(const Vec4& q, Mat3 out[4]) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  out[0] << 0, -z, y, z, 0, -x, -y, x, 0;
  out[1] << 0, y, z, y, -2.0 * x, -w, z, w, -2.0 * x;
  out[2] << -2.0 * y, x, w, x, 0, z, -w, z, -2.0 * y;
  out[3] << -2.0 * z, -w, x, w, -2.0 * z, y, x, y, 0;
  for (int k = 0; k < 4; ++k) out[k] *= 2.0;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Screen-space covariance dilation: matches the low-pass filter applied by
// point-splatting renderers so a splat always covers at least ~one pixel.
constexpr double kCovDilation = 0.3;

// Projects Gaussian i through the world-to-camera transform (rot, trans).
// Returns false when culled (degenerate rotation, behind the camera, or the
// 3-sigma footprint misses the frame).
bool project_gaussian(const GaussianSet& set, int64_t i,
                      const CameraIntrinsics& k, const Mat3& rot,
                      const Vec3& trans, ProjectionFull* out) {
  ProjectionFull& f = *out;
  f.pub.gauss_index = i;

  const Vec4 q = set.rotation(i);
  f.qnorm = q.norm();
  if (f.qnorm < 1e-12) return false;
  f.qn = q / f.qnorm;
  f.R3 = rotation_from_unit_quat(f.qn);
  const Vec3 ls = set.log_scale(i);
  f.s = Vec3(std::exp(ls[0]), std::exp(ls[1]), std::exp(ls[2]));
  f.M = f.R3 * f.s.asDiagonal();
  f.Sw = f.M * f.M.transpose();

  const Vec3 t = rot * set.position(i) + trans;
  if (t.z() <= kBehindCameraDepth) return false;
  f.pub.t_cam = t;
  f.pub.depth = t.z();

  const double inv_z = 1.0 / t.z();
  f.pub.cu = k.fx * t.x() * inv_z + k.cx;
  f.pub.cv = k.fy * t.y() * inv_z + k.cy;

  f.J << k.fx * inv_z, 0.0, -k.fx * t.x() * (inv_z * inv_z),
      0.0, k.fy * inv_z, -k.fy * t.y() * (inv_z * inv_z);
  f.B = f.J * rot;
  const Eigen::Matrix2d cov = f.B * f.Sw * f.B.transpose();
  const double a = cov(0, 0) + kCovDilation;
  const double b = cov(0, 1);
  const double c = cov(1, 1) + kCovDilation;
  f.pub.cov2d[0] = a;
  f.pub.cov2d[1] = b;
  f.pub.cov2d[2] = c;

  const double det = a * c - b * b;  // >= kCovDilation^2 after dilation
  const double inv_det = 1.0 / det;
  f.pub.conic[0] = c * inv_det;
  f.pub.conic[1] = -b * inv_det;
  f.pub.conic[2] = a * inv_det;

  const double mid = 0.5 * (a + c);
  const double lam_max = mid + std::sqrt(std::max(mid * mid - det, 0.0));
  const double radius = 3.0 * std::sqrt(lam_max);

  // Clamp in doubles before casting: a huge radius must not overflow int.
  const double x0d = std::max(0.0, std::ceil(f.pub.cu - radius));
  const double x1d = std::min(double(k.width - 1), std::floor(f.pub.cu + radius));
  const double y0d = std::max(0.0, std::ceil(f.pub.cv - radius));
  const double y1d = std::min(double(k.height - 1), std::floor(f.pub.cv + radius));
  if (x0d > x1d || y0d > y1d) return false;
  f.pub.x0 = static_cast<int>(x0d);
  f.pub.x1 = static_cast<int>(x1d);
  f.pub.y0 = static_cast<int>(y0d);
  f.pub.y1 = static_cast<int>(y1d);

  f.pub.alpha = sigmoid(set.opacity_logits[i]);
  f.pub.color[0] = set.colors[3 * i + 0];
  f.pub.color[1] = set.colors[3 * i + 1];
  f.pub.color[2] = set.colors[3 * i + 2];
  return true;
}

// Row constants shared by the forward and backward drivers so both evaluate
// the conic quadratic with identical operands.
void row_constants(int y, const ProjectedSplat& ps, double* dy, double* tb,
                   double* tc) {
  *dy = double(y) - ps.cv;
  *tb = (2.0 * ps.conic[1]) * (*dy);
  *tc = (ps.conic[2] * (*dy)) * (*dy);
}

}  // namespace

CameraPose composed_pose(const CameraPose& base, const PoseIncrement& inc) {
  const Mat3 r = rotation_from_axis_angle(inc.omega);
  CameraPose out;
  out.rotation = r * base.rotation;
  out.translation = r * base.translation + inc.delta_t;
  return out;
}

void RenderGrads::resize(int64_t n) {
  positions.assign(static_cast<size_t>(3 * n), 0.0);
  log_scales.assign(static_cast<size_t>(3 * n), 0.0);
  rotations.assign(static_cast<size_t>(4 * n), 0.0);
  opacity_logits.assign(static_cast<size_t>(n), 0.0);
  colors.assign(static_cast<size_t>(3 * n), 0.0);
  d_omega.setZero();
  d_delta_t.setZero();
}

void RenderGrads::add(const RenderGrads& o) {
  auto add_vec = [](std::vector<double>& dst, const std::vector<double>& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  };
  add_vec(positions, o.positions);
  add_vec(log_scales, o.log_scales);
  add_vec(rotations, o.rotations);
  add_vec(opacity_logits, o.opacity_logits);
  add_vec(colors, o.colors);
  d_omega += o.d_omega;
  d_delta_t += o.d_delta_t;
}

RenderResult render_with_aux(const GaussianSet& gaussians,
                             const CameraIntrinsics& k, const CameraPose& pose,
                             RenderAux* aux) {
  if (!k.valid()) throw UsageError("render: invalid camera intrinsics");
  const int w = k.width, h = k.height;
  const int64_t npx = int64_t(w) * h;

  RenderAux local;
  RenderAux& a = aux ? *aux : local;
  a.width = w;
  a.height = h;
  a.splats.clear();
  a.splats.reserve(static_cast<size_t>(gaussians.count));
  ProjectionFull full;
  for (int64_t i = 0; i < gaussians.count; ++i) {
    if (project_gaussian(gaussians, i, k, pose.rotation, pose.translation, &full))
      a.splats.push_back(full.pub);
  }
  std::sort(a.splats.begin(), a.splats.end(),
            [](const ProjectedSplat& l, const ProjectedSplat& r) {
              if (l.depth != r.depth) return l.depth < r.depth;
              return l.gauss_index < r.gauss_index;
            });

  for (int c = 0; c < 3; ++c) a.channel[c].assign(npx, 0.0);
  a.transmittance.assign(npx, 1.0);
  a.last_splat.assign(npx, -1);

  const kernels::Kernels& kr = kernels::active();
  for (size_t s = 0; s < a.splats.size(); ++s) {
    const ProjectedSplat& ps = a.splats[s];
    kernels::SplatRowFwd args;
    args.ca = ps.conic[0];
    args.cb = ps.conic[1];
    args.cc = ps.conic[2];
    args.cu = ps.cu;
    args.alpha = ps.alpha;
    args.color[0] = ps.color[0];
    args.color[1] = ps.color[1];
    args.color[2] = ps.color[2];
    args.index = static_cast<int32_t>(s);
    args.x0 = ps.x0;
    args.count = ps.x1 - ps.x0 + 1;
    for (int y = ps.y0; y <= ps.y1; ++y) {
      row_constants(y, ps, &args.dy, &args.tb, &args.tc);
      const int64_t off = int64_t(y) * w + ps.x0;
      args.ch[0] = a.channel[0].data() + off;
      args.ch[1] = a.channel[1].data() + off;
      args.ch[2] = a.channel[2].data() + off;
      args.transmittance = a.transmittance.data() + off;
      args.last_splat = a.last_splat.data() + off;
      kr.splat_row_fwd(args);
    }
  }

  RenderResult result;
  result.color = Image(w, h);
  result.alpha.resize(npx);
  for (int64_t p = 0; p < npx; ++p) {
    result.color.data[3 * p + 0] = a.channel[0][p];
    result.color.data[3 * p + 1] = a.channel[1][p];
    result.color.data[3 * p + 2] = a.channel[2][p];
    result.alpha[p] = 1.0 - a.transmittance[p];
  }
  return result;
}

RenderResult render(const GaussianSet& gaussians, const CameraIntrinsics& k,
                    const CameraPose& pose) {
  return render_with_aux(gaussians, k, pose, nullptr);
}

void render_backward(const GaussianSet& gaussians, const CameraIntrinsics& k,
                     const CameraPose& base, const PoseIncrement& inc,
                     const RenderAux& aux, const Image& grad_color,
                     RenderGrads* grads, bool want_pose_grads) {
  const int w = aux.width, h = aux.height;
  if (grad_color.width != w || grad_color.height != h)
    throw UsageError("render_backward: gradient image shape mismatch");
  if (grads->positions.size() != static_cast<size_t>(3 * gaussians.count))
    grads->resize(gaussians.count);

  const CameraPose pose = composed_pose(base, inc);
  const int64_t npx = int64_t(w) * h;

  // Deinterleave dL/dC into channel planes for the row kernels.
  std::vector<double> go[3];
  for (int c = 0; c < 3; ++c) {
    go[c].resize(npx);
    for (int64_t p = 0; p < npx; ++p) go[c][p] = grad_color.data[3 * p + c];
  }
  std::vector<double> suffix[3];
  for (int c = 0; c < 3; ++c) suffix[c].assign(npx, 0.0);
  std::vector<double> trans = aux.transmittance;  // reconstructed in reverse

  const kernels::Kernels& kr = kernels::active();
  Mat3 dw_acc = Mat3::Zero();
  Vec3 dt_acc = Vec3::Zero();
  ProjectionFull full;
  Mat3 dr_quat[4];

  for (int64_t s = static_cast<int64_t>(aux.splats.size()) - 1; s >= 0; --s) {
    const ProjectedSplat& ps = aux.splats[s];
    kernels::SplatRowBwd args;
    args.ca = ps.conic[0];
    args.cb = ps.conic[1];
    args.cc = ps.conic[2];
    args.cu = ps.cu;
    args.alpha = ps.alpha;
    args.color[0] = ps.color[0];
    args.color[1] = ps.color[1];
    args.color[2] = ps.color[2];
    args.index = static_cast<int32_t>(s);
    args.x0 = ps.x0;
    args.count = ps.x1 - ps.x0 + 1;
    for (int y = ps.y0; y <= ps.y1; ++y) {
      row_constants(y, ps, &args.dy, &args.tb, &args.tc);
      const int64_t off = int64_t(y) * w + ps.x0;
      args.grad_out[0] = go[0].data() + off;
      args.grad_out[1] = go[1].data() + off;
      args.grad_out[2] = go[2].data() + off;
      args.suffix[0] = suffix[0].data() + off;
      args.suffix[1] = suffix[1].data() + off;
      args.suffix[2] = suffix[2].data() + off;
      args.transmittance = trans.data() + off;
      args.last_splat = aux.last_splat.data() + off;
      kr.splat_row_bwd(args);  // g_* accumulate across rows
    }

    const int64_t i = ps.gauss_index;
    // Screen-space gradients -> parameter gradients. Recompute the projection
    // chain; identical inputs give identical intermediates.
    const bool ok = project_gaussian(gaussians, i, k, pose.rotation,
                                     pose.translation, &full);
    if (!ok) continue;  // cannot happen for a splat that rendered

    grads->colors[3 * i + 0] += args.g_color[0];
    grads->colors[3 * i + 1] += args.g_color[1];
    grads->colors[3 * i + 2] += args.g_color[2];
    grads->opacity_logits[i] += args.g_alpha * ps.alpha * (1.0 - ps.alpha);

    // Invert the conic: dL/d(2d covariance) from dL/d(conic).
    const double a2 = ps.cov2d[0], b2 = ps.cov2d[1], c2 = ps.cov2d[2];
    const double det = a2 * c2 - b2 * b2;
    const double inv_det2 = 1.0 / (det * det);
    const double g_ca = args.g_conic[0];
    const double g_cb = args.g_conic[1];
    const double g_cc = args.g_conic[2];
    const double d_a = (-c2 * c2 * g_ca + b2 * c2 * g_cb - b2 * b2 * g_cc) * inv_det2;
    const double d_b =
        (2.0 * b2 * c2 * g_ca - (det + 2.0 * b2 * b2) * g_cb + 2.0 * a2 * b2 * g_cc) *
        inv_det2;
    const double d_c = (-b2 * b2 * g_ca + a2 * b2 * g_cb - a2 * a2 * g_cc) * inv_det2;

    Eigen::Matrix2d g2;
    g2 << d_a, 0.5 * d_b, 0.5 * d_b, d_c;
    const Mat3 gw = full.B.transpose() * g2 * full.B;  // dL/d(world covariance)
    const Eigen::Matrix<double, 2, 3> d_bmat = 2.0 * (g2 * full.B * full.Sw);
    const Eigen::Matrix<double, 2, 3> d_j = d_bmat * pose.rotation.transpose();
    const Mat3 d_w_cov = full.J.transpose() * d_bmat;

    // Scale / rotation factors of the world covariance.
    const Mat3 d_m = 2.0 * (gw * full.M);
    const Mat3 d_r3 = d_m * full.s.asDiagonal();
    const Vec3 d_s = (full.R3.transpose() * d_m).diagonal();
    const Vec3 d_log_s = d_s.cwiseProduct(full.s);
    grads->log_scales[3 * i + 0] += d_log_s[0];
    grads->log_scales[3 * i + 1] += d_log_s[1];
    grads->log_scales[3 * i + 2] += d_log_s[2];

    quat_rotation_partials(full.qn, dr_quat);
    Vec4 g_qhat;
    for (int q = 0; q < 4; ++q) g_qhat[q] = d_r3.cwiseProduct(dr_quat[q]).sum();
    const Vec4 g_q = (g_qhat - full.qn * full.qn.dot(g_qhat)) / full.qnorm;
    for (int q = 0; q < 4; ++q) grads->rotations[4 * i + q] += g_q[q];

    // Camera-space position gradient: center path plus Jacobian path.
    const double tx = ps.t_cam.x(), ty = ps.t_cam.y(), tz = ps.t_cam.z();
    const double inv_z = 1.0 / tz;
    const double inv_z2 = inv_z * inv_z;
    const double inv_z3 = inv_z2 * inv_z;
    Vec3 d_t = Vec3::Zero();
    d_t[0] += args.g_center[0] * k.fx * inv_z;
    d_t[1] += args.g_center[1] * k.fy * inv_z;
    d_t[2] += -args.g_center[0] * k.fx * tx * inv_z2 -
              args.g_center[1] * k.fy * ty * inv_z2;
    d_t[0] += d_j(0, 2) * (-k.fx * inv_z2);
    d_t[1] += d_j(1, 2) * (-k.fy * inv_z2);
    d_t[2] += d_j(0, 0) * (-k.fx * inv_z2) + d_j(1, 1) * (-k.fy * inv_z2) +
              d_j(0, 2) * (2.0 * k.fx * tx * inv_z3) +
              d_j(1, 2) * (2.0 * k.fy * ty * inv_z3);

    const Vec3 d_mu = pose.rotation.transpose() * d_t;
    grads->positions[3 * i + 0] += d_mu[0];
    grads->positions[3 * i + 1] += d_mu[1];
    grads->positions[3 * i + 2] += d_mu[2];

    if (want_pose_grads) {
      const Vec3 mu = gaussians.position(i);
      dw_acc += d_t * mu.transpose() + d_w_cov;
      dt_acc += d_t;
    }
  }

  if (want_pose_grads) {
    // Chain onto the increment: W_total = R(omega) * R0,
    // T_total = R(omega) * t0 + delta_t.
    const Mat3 d_r_omega = dw_acc * base.rotation.transpose() +
                           dt_acc * base.translation.transpose();
    for (int axis = 0; axis < 3; ++axis) {
      grads->d_omega[axis] +=
          d_r_omega.cwiseProduct(rotation_axis_angle_jacobian(inc.omega, axis))
              .sum();
    }
    grads->d_delta_t += dt_acc;
  }
}

}  // namespace sdigs
