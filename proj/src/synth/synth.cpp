#include "sdigs/synth/synth.hpp"

#include "sdigs/core/camera.hpp"
#include "sdigs/core/error.hpp"
#include "sdigs/core/parallel.hpp"
#include "sdigs/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdigs {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Colors are quantized to the 8-bit grid so PNG round trips are lossless and
// downstream color-distance thresholds see exactly what was generated.
Vec3 quantize8(const Vec3& c) {
  Vec3 q;
  for (int i = 0; i < 3; ++i) {
    const double v = std::clamp(c[i], 0.0, 1.0);
    q[i] = static_cast<double>(std::llround(v * 255.0)) / 255.0;
  }
  return q;
}

int64_t cells_along(double extent, double cell) {
  return std::max<int64_t>(1, static_cast<int64_t>(std::ceil(extent / cell - 1e-9)));
}

int64_t cell_index(const RectPrimitive& r, double a, double b) {
  if (r.pattern.kind == PatternKind::solid) return 0;
  const int64_t ncu = cells_along(r.extent_u, r.pattern.cell);
  const int64_t ncv = cells_along(r.extent_v, r.pattern.cell);
  const int64_t ci = std::clamp<int64_t>(
      static_cast<int64_t>(std::floor(a / r.pattern.cell)), 0, ncu - 1);
  const int64_t cj = std::clamp<int64_t>(
      static_cast<int64_t>(std::floor(b / r.pattern.cell)), 0, ncv - 1);
  return cj * ncu + ci;
}

Vec3 palette_color(uint64_t seed, int rect, int64_t cell) {
  uint64_t k = splitmix64(seed ^ splitmix64((static_cast<uint64_t>(rect) << 32) ^
                                            static_cast<uint64_t>(cell)));
  Vec3 c;
  for (int i = 0; i < 3; ++i) {
    // [30, 225]: keeps palette cells away from pure black/white.
    c[i] = static_cast<double>(30 + (k % 196)) / 255.0;
    k = splitmix64(k);
  }
  return c;
}

Vec3 face_color(const RectPrimitive& r, int rect_index, int64_t cell,
                uint64_t seed) {
  switch (r.pattern.kind) {
    case PatternKind::solid:
      return r.pattern.base;
    case PatternKind::checker: {
      const int64_t ncu = cells_along(r.extent_u, r.pattern.cell);
      const int64_t ci = cell % ncu, cj = cell / ncu;
      return ((ci + cj) & 1) ? r.pattern.alt : r.pattern.base;
    }
    case PatternKind::palette:
      return palette_color(seed, rect_index, cell);
  }
  return r.pattern.base;
}

// Three standard normals from one key (Box-Muller over pinned uniforms), so
// pixel noise is reproducible independent of threading and platform.
Vec3 gaussian3(uint64_t key) {
  auto u01 = [](uint64_t k) {
    return (static_cast<double>(k >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  };
  const uint64_t k1 = splitmix64(key), k2 = splitmix64(k1);
  const uint64_t k3 = splitmix64(k2), k4 = splitmix64(k3);
  const double r1 = std::sqrt(-2.0 * std::log(u01(k1)));
  const double a1 = kTwoPi * u01(k2);
  const double r2 = std::sqrt(-2.0 * std::log(u01(k3)));
  const double a2 = kTwoPi * u01(k4);
  return Vec3(r1 * std::cos(a1), r1 * std::sin(a1), r2 * std::cos(a2));
}

void validate_spec(const SceneSpec& spec) {
  if (spec.train_views < 2)
    throw UsageError("scene spec: at least two train views required");
  if (spec.holdout_views < 0 || spec.holdout_views > spec.train_views - 1)
    throw UsageError("scene spec: holdout views must be in [0, train-1]");
  if (spec.width < 8 || spec.height < 8)
    throw UsageError("scene spec: image dims must be at least 8x8");
  if (!(spec.focal > 0.0)) throw UsageError("scene spec: focal must be positive");
  if (!(spec.arc_radius > 0.0) || !(spec.arc_span > 0.0))
    throw UsageError("scene spec: arc radius and span must be positive");
  if (spec.rects.empty()) throw UsageError("scene spec: no primitives");
  for (const RectPrimitive& r : spec.rects) {
    if (!(r.extent_u > 0.0) || !(r.extent_v > 0.0))
      throw UsageError("scene spec: rect extents must be positive");
    if (std::abs(r.u_axis.norm() - 1.0) > 1e-9 ||
        std::abs(r.v_axis.norm() - 1.0) > 1e-9 ||
        std::abs(r.u_axis.dot(r.v_axis)) > 1e-9)
      throw UsageError("scene spec: rect axes must be orthonormal");
    if (r.pattern.kind != PatternKind::solid && !(r.pattern.cell > 0.0))
      throw UsageError("scene spec: patterned rect needs a positive cell size");
  }
  if (!(spec.noise_std >= 0.0))
    throw UsageError("scene spec: noise std must be non-negative");
}

CameraPose look_at(const Vec3& position, const Vec3& target) {
  const Vec3 up(0, 1, 0);
  const Vec3 z = (target - position).normalized();
  Vec3 x = up.cross(z);
  const double n = x.norm();
  if (n < 1e-9) throw DataError("camera rig: view direction parallel to up");
  x /= n;
  const Vec3 y = z.cross(x);
  CameraPose pose;
  pose.rotation.row(0) = x;
  pose.rotation.row(1) = y;
  pose.rotation.row(2) = z;
  pose.translation = -(pose.rotation * position);
  return pose;
}

struct Hit {
  double s = std::numeric_limits<double>::infinity();
  int rect = -1;
  int64_t cell = 0;
};

// Nearest intersection along o + s*d over all rects; ties (shared box edges)
// go to the lowest rect index because the scan accepts strictly closer hits.
bool cast_ray(const SceneSpec& spec, const std::vector<Vec3>& normals,
              const Vec3& o, const Vec3& d, Hit* hit) {
  *hit = Hit{};
  for (size_t r = 0; r < spec.rects.size(); ++r) {
    const RectPrimitive& rect = spec.rects[r];
    const double denom = d.dot(normals[r]);
    if (std::abs(denom) < 1e-12) continue;  // ray parallel to the plane
    const double s = (rect.origin - o).dot(normals[r]) / denom;
    if (s <= 1e-9 || s >= hit->s) continue;
    const Vec3 q = o + s * d;
    const double a = (q - rect.origin).dot(rect.u_axis);
    if (a < 0.0 || a > rect.extent_u) continue;
    const double b = (q - rect.origin).dot(rect.v_axis);
    if (b < 0.0 || b > rect.extent_v) continue;
    hit->s = s;
    hit->rect = static_cast<int>(r);
    hit->cell = cell_index(rect, a, b);
  }
  return hit->rect >= 0;
}

}  // namespace

int64_t rect_cell_count(const RectPrimitive& rect) {
  if (rect.pattern.kind == PatternKind::solid) return 1;
  return cells_along(rect.extent_u, rect.pattern.cell) *
         cells_along(rect.extent_v, rect.pattern.cell);
}

RegionTable region_table(const SceneSpec& spec) {
  RegionTable table;
  table.base.reserve(spec.rects.size());
  for (const RectPrimitive& r : spec.rects) {
    table.base.push_back(table.total);
    table.total += rect_cell_count(r);
  }
  return table;
}

int RegionTable::rect_of(int64_t region) const {
  const auto it = std::upper_bound(base.begin(), base.end(), region);
  return static_cast<int>(it - base.begin()) - 1;
}

void add_box(SceneSpec& spec, const Vec3& center, const Vec3& half,
             const FacePattern& pattern) {
  const double hx = half[0], hy = half[1], hz = half[2];
  auto face = [&](const Vec3& origin, const Vec3& u, const Vec3& v, double eu,
                  double ev) {
    RectPrimitive r;
    r.origin = origin;
    r.u_axis = u;
    r.v_axis = v;
    r.extent_u = eu;
    r.extent_v = ev;
    r.pattern = pattern;
    spec.rects.push_back(r);
  };
  const Vec3 c = center;
  face(c + Vec3(hx, -hy, -hz), Vec3(0, 1, 0), Vec3(0, 0, 1), 2 * hy, 2 * hz);
  face(c + Vec3(-hx, -hy, -hz), Vec3(0, 1, 0), Vec3(0, 0, 1), 2 * hy, 2 * hz);
  face(c + Vec3(-hx, hy, -hz), Vec3(1, 0, 0), Vec3(0, 0, 1), 2 * hx, 2 * hz);
  face(c + Vec3(-hx, -hy, -hz), Vec3(1, 0, 0), Vec3(0, 0, 1), 2 * hx, 2 * hz);
  face(c + Vec3(-hx, -hy, hz), Vec3(1, 0, 0), Vec3(0, 1, 0), 2 * hx, 2 * hy);
  face(c + Vec3(-hx, -hy, -hz), Vec3(1, 0, 0), Vec3(0, 1, 0), 2 * hx, 2 * hy);
  spec.boxes.push_back(BoxVolume{c - half, c + half});
}

std::vector<Vec3> arc_camera_centers(const SceneSpec& spec) {
  const int n = spec.train_views;
  std::vector<double> angles;
  for (int k = 0; k < n; ++k)
    angles.push_back(-0.5 * spec.arc_span +
                     spec.arc_span * k / static_cast<double>(n - 1));
  // Holdout cameras at the midpoints of the first gaps, appended after train.
  for (int j = 0; j < spec.holdout_views; ++j)
    angles.push_back(0.5 * (angles[j] + angles[j + 1]));

  std::vector<Vec3> centers;
  centers.reserve(angles.size());
  for (double theta : angles) {
    centers.push_back(spec.aim + Vec3(spec.arc_radius * std::sin(theta),
                                      spec.arc_height,
                                      -spec.arc_radius * std::cos(theta)));
  }
  return centers;
}

SyntheticBundle generate(const SceneSpec& spec, int threads) {
  validate_spec(spec);

  const std::vector<Vec3> centers = arc_camera_centers(spec);
  for (const Vec3& c : centers) {
    for (const BoxVolume& box : spec.boxes) {
      if ((c.array() > box.lo.array()).all() && (c.array() < box.hi.array()).all())
        throw DataError("scene spec: a camera sits inside a box primitive");
    }
  }

  std::vector<CameraPose> poses;
  poses.reserve(centers.size());
  for (const Vec3& c : centers) poses.push_back(look_at(c, spec.aim));

  // Re-anchor: camera 1's frame becomes the world frame. Points map through
  // x' = R1*x + t1, so pose k becomes (Rk*R1^T, tk - Rk*R1^T*t1).
  SceneSpec anchored = spec;
  const Mat3 r1 = poses[0].rotation;
  const Vec3 t1 = poses[0].translation;
  for (RectPrimitive& r : anchored.rects) {
    r.origin = r1 * r.origin + t1;
    r.u_axis = r1 * r.u_axis;
    r.v_axis = r1 * r.v_axis;
  }
  for (size_t k = 1; k < poses.size(); ++k) {
    const Mat3 rk = poses[k].rotation * r1.transpose();
    poses[k].translation = poses[k].translation - rk * t1;
    poses[k].rotation = rk;
  }
  poses[0].rotation = Mat3::Identity();
  poses[0].translation = Vec3::Zero();

  std::vector<Vec3> normals;
  normals.reserve(anchored.rects.size());
  for (const RectPrimitive& r : anchored.rects)
    normals.push_back(r.u_axis.cross(r.v_axis));

  CameraIntrinsics k;
  k.fx = k.fy = spec.focal;
  k.cx = (spec.width - 1) / 2.0;
  k.cy = (spec.height - 1) / 2.0;
  k.width = spec.width;
  k.height = spec.height;

  const RegionTable regions = region_table(spec);
  const int64_t npx = static_cast<int64_t>(spec.width) * spec.height;
  const uint64_t noise_salt = splitmix64(spec.seed ^ 0xC0FFEEULL);

  SyntheticBundle bundle;
  bundle.train_count = spec.train_views;
  const size_t nviews = poses.size();
  bundle.views.resize(nviews);
  bundle.depth_maps.resize(nviews);
  bundle.region_maps.resize(nviews);
  bundle.dense_points.resize(nviews);

  for (size_t view = 0; view < nviews; ++view) {
    CameraView& cv = bundle.views[view];
    cv.index = static_cast<int>(view) + 1;
    cv.intrinsics = k;
    cv.pose = poses[view];
    cv.image = Image(spec.width, spec.height);
    bundle.depth_maps[view].assign(npx, 0.0);
    bundle.region_maps[view].assign(npx, 0);

    const Vec3 origin = cv.pose.camera_center();
    const Mat3 rot_t = cv.pose.rotation.transpose();

    parallel_for(spec.height, threads, [&](int64_t y) {
      for (int x = 0; x < spec.width; ++x) {
        // d_cam has z = 1, so the hit parameter s is the camera-space depth.
        const Vec3 d_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
        const Vec3 d = rot_t * d_cam;
        Hit hit;
        if (!cast_ray(anchored, normals, origin, d, &hit))
          throw DataError("synthetic render: ray escaped the scene");
        const int64_t p = y * spec.width + x;
        bundle.depth_maps[view][p] = hit.s;
        bundle.region_maps[view][p] = static_cast<int32_t>(
            regions.base[hit.rect] + hit.cell);
        Vec3 color =
            face_color(anchored.rects[hit.rect], hit.rect, hit.cell, spec.seed);
        if (spec.noise_std > 0.0) {
          const uint64_t key =
              splitmix64(noise_salt ^ (static_cast<uint64_t>(view) << 40) ^
                         static_cast<uint64_t>(p));
          color += spec.noise_std * gaussian3(key);
        }
        cv.image.set_pixel(x, static_cast<int>(y), quantize8(color));
      }
    });

    DensePointSet& dense = bundle.dense_points[view];
    dense.view_index = cv.index;
    dense.positions.reserve(npx);
    dense.colors.reserve(npx);
    dense.source_pixels.reserve(npx);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const int64_t p = static_cast<int64_t>(y) * spec.width + x;
        dense.positions.push_back(
            backproject(x, y, bundle.depth_maps[view][p], k, cv.pose));
        dense.colors.push_back(cv.image.pixel(x, y));
        dense.source_pixels.push_back(Pixel(x, y));
      }
    }
  }
  return bundle;
}

SceneSpec reference_scene(SceneProfile profile, int train_views, uint64_t seed) {
  auto q = [](int r, int g, int b) {
    return Vec3(r / 255.0, g / 255.0, b / 255.0);
  };
  SceneSpec spec;
  spec.train_views = train_views;
  spec.seed = seed;

  // Rect 0 is always the solid backdrop (ground-truth region id 0); it is
  // large enough that every camera ray terminates on it.
  RectPrimitive backdrop;
  backdrop.origin = Vec3(-6, -6, 1.2);
  backdrop.extent_u = 12.0;
  backdrop.extent_v = 12.0;
  backdrop.pattern.kind = PatternKind::solid;
  backdrop.pattern.base = q(168, 196, 230);
  spec.rects.push_back(backdrop);

  auto plane = [&](const Vec3& origin, double eu, double ev,
                   const FacePattern& pat) {
    RectPrimitive r;
    r.origin = origin;
    r.extent_u = eu;
    r.extent_v = ev;
    r.pattern = pat;
    spec.rects.push_back(r);
  };
  FacePattern pal;
  pal.kind = PatternKind::palette;
  FacePattern chk;
  chk.kind = PatternKind::checker;
  chk.base = q(40, 40, 48);
  chk.alt = q(230, 226, 216);

  switch (profile) {
    case SceneProfile::flat_dominant: {
      // Mostly bare backdrop: one small palette card and one checkered box.
      pal.cell = 0.25;
      plane(Vec3(-0.5, -0.4, 0.0), 1.0, 0.8, pal);
      chk.cell = 0.09;
      add_box(spec, Vec3(0.55, 0.28, 0.35), Vec3(0.18, 0.18, 0.18), chk);
      break;
    }
    case SceneProfile::texture_dominant: {
      // A fine checker wall fills nearly the whole frame.
      chk.cell = 0.12;
      plane(Vec3(-1.3, -1.3, 0.0), 2.6, 2.6, chk);
      FacePattern accent;
      accent.kind = PatternKind::solid;
      accent.base = q(196, 84, 72);
      add_box(spec, Vec3(-0.7, -0.55, -0.5), Vec3(0.15, 0.15, 0.15), accent);
      break;
    }
    case SceneProfile::mixed: {
      // Half flat (backdrop + solid card), half textured (checker + palette).
      // The narrower arc keeps holdout cameras close to their neighbours,
      // which the quality-preservation comparison depends on.
      spec.arc_span = 0.4;
      chk.cell = 0.1;
      plane(Vec3(-1.35, -1.0, 0.0), 1.15, 2.0, chk);
      pal.cell = 0.28;
      plane(Vec3(0.15, -0.9, 0.1), 1.1, 1.8, pal);
      FacePattern card;
      card.kind = PatternKind::solid;
      card.base = q(214, 168, 90);
      plane(Vec3(-0.2, -0.15, -0.45), 0.55, 0.5, card);
      break;
    }
  }
  return spec;
}

SceneProfile profile_from_name(const std::string& name) {
  if (name == "flat_dominant") return SceneProfile::flat_dominant;
  if (name == "texture_dominant") return SceneProfile::texture_dominant;
  if (name == "mixed") return SceneProfile::mixed;
  throw UsageError("unknown scene profile: " + name);
}

const char* profile_name(SceneProfile profile) {
  switch (profile) {
    case SceneProfile::flat_dominant:
      return "flat_dominant";
    case SceneProfile::texture_dominant:
      return "texture_dominant";
    case SceneProfile::mixed:
      return "mixed";
  }
  return "unknown";
}

}  // namespace sdigs
