#pragma once

#include "sdigs/core/types.hpp"

#include <optional>

namespace sdigs {

// Points with camera-space depth at or below this are treated as behind the
// camera and never project.
inline constexpr double kBehindCameraDepth = 1e-9;

struct PixelProjection {
  double u = 0.0;  // column coordinate
  double v = 0.0;  // row coordinate
  double depth = 0.0;
};

// Continuous pixel coordinates of a world point, or nullopt when the point is
// at or behind the camera plane. No frame bounds check here; see in_frame.
std::optional<PixelProjection> project(const Vec3& point_world,
                                       const CameraIntrinsics& K,
                                       const CameraPose& pose);

// Inverse of project for a pixel with known positive depth.
// Throws UsageError when depth <= 0.
Vec3 backproject(double u, double v, double depth, const CameraIntrinsics& K,
                 const CameraPose& pose);

// Nearest-integer pixel (half rounds away from zero). Shared by in_frame and
// segmentation-label lookups so both always agree on the landing pixel.
Pixel round_pixel(double u, double v);

// True iff the rounded pixel lies inside [0,width) x [0,height).
bool in_frame(double u, double v, const CameraIntrinsics& K);

// Rigid-transform composition: result(x) = outer(inner(x)).
CameraPose compose(const CameraPose& outer, const CameraPose& inner);
CameraPose inverse(const CameraPose& pose);

// Rodrigues: rotation matrix of an axis-angle vector (theta = |omega|).
Mat3 rotation_from_axis_angle(const Vec3& omega);
Mat3 skew(const Vec3& v);

// Partial derivative of rotation_from_axis_angle(omega) with respect to
// omega[i], valid at every omega including zero (Taylor switch near zero).
Mat3 rotation_axis_angle_jacobian(const Vec3& omega, int i);

}  // namespace sdigs
