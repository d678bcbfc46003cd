#include "sdigs/core/camera.hpp"

#include "sdigs/core/error.hpp"

#include <cmath>

namespace sdigs {

std::optional<PixelProjection> project(const Vec3& point_world,
                                       const CameraIntrinsics& K,
                                       const CameraPose& pose) {
  Vec3 pc = pose.rotation * point_world + pose.translation;
  if (pc.z() <= kBehindCameraDepth) return std::nullopt;
  PixelProjection out;
  out.u = K.fx * pc.x() / pc.z() + K.cx;
  out.v = K.fy * pc.y() / pc.z() + K.cy;
  out.depth = pc.z();
  return out;
}

Vec3 backproject(double u, double v, double depth, const CameraIntrinsics& K,
                 const CameraPose& pose) {
  if (!(depth > 0.0)) {
    throw UsageError("backproject: depth must be positive");
  }
  Vec3 pc((u - K.cx) / K.fx * depth, (v - K.cy) / K.fy * depth, depth);
  return pose.rotation.transpose() * (pc - pose.translation);
}

Pixel round_pixel(double u, double v) {
  return Pixel(static_cast<int>(std::llround(u)),
               static_cast<int>(std::llround(v)));
}

bool in_frame(double u, double v, const CameraIntrinsics& K) {
  Pixel p = round_pixel(u, v);
  return p.x() >= 0 && p.x() < K.width && p.y() >= 0 && p.y() < K.height;
}

CameraPose compose(const CameraPose& outer, const CameraPose& inner) {
  CameraPose out;
  out.rotation = outer.rotation * inner.rotation;
  out.translation = outer.rotation * inner.translation + outer.translation;
  return out;
}

CameraPose inverse(const CameraPose& pose) {
  CameraPose out;
  out.rotation = pose.rotation.transpose();
  out.translation = -(pose.rotation.transpose() * pose.translation);
  return out;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Mat3 rotation_from_axis_angle(const Vec3& omega) {
  double theta2 = omega.squaredNorm();
  Mat3 k = skew(omega);
  // Taylor forms keep the map smooth through theta -> 0.
  if (theta2 < 1e-16) {
    return Mat3::Identity() + k + 0.5 * (k * k);
  }
  double theta = std::sqrt(theta2);
  double a = std::sin(theta) / theta;
  double b = (1.0 - std::cos(theta)) / theta2;
  return Mat3::Identity() + a * k + b * (k * k);
}

Mat3 rotation_axis_angle_jacobian(const Vec3& omega, int i) {
  Vec3 e = Vec3::Zero();
  e[i] = 1.0;
  double theta2 = omega.squaredNorm();
  if (theta2 < 1e-16) {
    // dR/dw_i at the identity, first order in omega.
    return skew(e) + 0.5 * (skew(e) * skew(omega) + skew(omega) * skew(e));
  }
  // Gallego & Yezzi closed form:
  // dR/dw_i = (w_i [w]_x + [ w x (I - R) e_i ]_x) / |w|^2 * R
  Mat3 R = rotation_from_axis_angle(omega);
  Vec3 cross = omega.cross((Mat3::Identity() - R) * e);
  return ((omega[i] * skew(omega) + skew(cross)) / theta2) * R;
}

}  // namespace sdigs
