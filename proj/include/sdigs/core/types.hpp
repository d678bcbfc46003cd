#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace sdigs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
// Unaligned 4-vector so it can live in std::vector without an aligned allocator.
using Vec4 = Eigen::Matrix<double, 4, 1, Eigen::DontAlign>;
using Vec6 = Eigen::Matrix<double, 6, 1, Eigen::DontAlign>;
using Pixel = Eigen::Vector2i;  // (x, y) == (column, row)

// Pinhole intrinsics. Pixel sample points sit at integer coordinates, so the
// principal point of a centered w x h sensor is ((w-1)/2, (h-1)/2).
struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
           cx < width && cy >= 0.0 && cy < height;
  }
};

// World-to-camera rigid transform: x_cam = rotation * x_world + translation.
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  // Largest deviation of rotation from a proper rotation matrix:
  // max over |R^T R - I| entries and |det(R) - 1|.
  double rotation_defect() const;
  bool valid(double tol = 1e-9) const { return rotation_defect() <= tol; }

  Vec3 camera_center() const { return -(rotation.transpose() * translation); }
};

// Row-major H x W x 3 RGB raster, values in [0, 1].
struct Image {
  int width = 0, height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h),
        data(static_cast<size_t>(w) * static_cast<size_t>(h) * 3, fill) {}

  size_t offset(int x, int y) const {
    return (static_cast<size_t>(y) * width + x) * 3;
  }
  double& at(int x, int y, int c) { return data[offset(x, y) + c]; }
  double at(int x, int y, int c) const { return data[offset(x, y) + c]; }
  Vec3 pixel(int x, int y) const {
    const double* p = &data[offset(x, y)];
    return Vec3(p[0], p[1], p[2]);
  }
  void set_pixel(int x, int y, const Vec3& rgb) {
    double* p = &data[offset(x, y)];
    p[0] = rgb[0];
    p[1] = rgb[1];
    p[2] = rgb[2];
  }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height;
  }
  int64_t pixel_count() const {
    return static_cast<int64_t>(width) * height;
  }
};

// A posed, calibrated input view. `index` is the 1-based ordinal used for
// context-view selection; ordinals follow manifest order of the selected set.
struct CameraView {
  int index = 0;
  CameraIntrinsics intrinsics;
  CameraPose pose;
  Image image;
};

// Per-view dense lift: one world point per pixel (row-major pixel order).
struct DensePointSet {
  int view_index = 0;
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;
  std::vector<Pixel> source_pixels;

  size_t size() const { return positions.size(); }
};

// Flattened union of per-view dense point sets; indices into this cloud are
// the point ids used by labeling and downsampling.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;
  std::vector<int32_t> source_views;
  std::vector<Pixel> source_pixels;

  size_t size() const { return positions.size(); }
  void append(const DensePointSet& dp);
  static PointCloud concatenate(const std::vector<DensePointSet>& sets);
};

}  // namespace sdigs
