#pragma once

#include "sdigs/core/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sdigs {

enum class PatternKind { solid, checker, palette };

// Face coloring. Checker alternates base/alt on a cell grid; palette draws a
// deterministic per-cell color keyed on (scene seed, rect index, cell index).
struct FacePattern {
  PatternKind kind = PatternKind::solid;
  Vec3 base = Vec3(0.5, 0.5, 0.5);
  Vec3 alt = Vec3(0.25, 0.25, 0.25);
  double cell = 0.0;  // cell edge length in world units (checker/palette)
};

// Finite rectangle: origin corner plus two orthonormal in-plane axes scaled
// by the extents. Points are origin + a*u_axis + b*v_axis, a in [0, extent_u].
struct RectPrimitive {
  Vec3 origin = Vec3::Zero();
  Vec3 u_axis = Vec3(1, 0, 0);
  Vec3 v_axis = Vec3(0, 1, 0);
  double extent_u = 1.0;
  double extent_v = 1.0;
  FacePattern pattern;
};

// Axis-aligned box volume (build frame), used only to reject cameras placed
// inside solid geometry; the renderable surface is the six rects.
struct BoxVolume {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
};

// Procedural scene: rect list plus an arc camera rig. Cameras sit on an arc
// of `arc_radius` at height `arc_height` around `aim`, all looking at `aim`;
// train views spread evenly over `arc_span` and holdout views sit at the
// midpoints of the first gaps. The emitted bundle is re-anchored so view 1's
// camera frame is the world frame.
struct SceneSpec {
  std::vector<RectPrimitive> rects;  // rect 0 is the backdrop by convention
  std::vector<BoxVolume> boxes;
  int train_views = 3;
  int holdout_views = 0;
  double arc_radius = 3.0;
  double arc_span = 0.8;  // radians
  double arc_height = -0.4;
  Vec3 aim = Vec3::Zero();
  int width = 64;
  int height = 64;
  double focal = 70.0;
  uint64_t seed = 0;
  double noise_std = 0.0;  // optional Gaussian pixel noise, off by default
};

struct SyntheticBundle {
  std::vector<CameraView> views;  // train views first, then holdout views
  int train_count = 0;
  std::vector<std::vector<double>> depth_maps;    // per view, row-major H*W
  std::vector<std::vector<int32_t>> region_maps;  // ground-truth region ids
  std::vector<DensePointSet> dense_points;        // one point per pixel
};

// Ground-truth region id layout: rect r owns ids [base[r], base[r] + cells).
// Solid rects have one cell; checker/palette rects have a cell grid.
struct RegionTable {
  std::vector<int64_t> base;
  int64_t total = 0;
  int rect_of(int64_t region) const;
};

RegionTable region_table(const SceneSpec& spec);
int64_t rect_cell_count(const RectPrimitive& rect);

// Six rects plus the interior volume for the camera-placement check.
void add_box(SceneSpec& spec, const Vec3& center, const Vec3& half,
             const FacePattern& pattern);

// Camera centers the rig will use (build frame, train then holdout).
std::vector<Vec3> arc_camera_centers(const SceneSpec& spec);

// Ray-casts every view. Deterministic for a fixed spec regardless of thread
// count. Throws UsageError for invalid specs and DataError when a camera sits
// inside a box volume or a ray escapes the scene (no backdrop coverage).
SyntheticBundle generate(const SceneSpec& spec, int threads = 1);

enum class SceneProfile { flat_dominant, texture_dominant, mixed };

// Frozen reference scenes: flat_dominant is mostly bare backdrop,
// texture_dominant is mostly fine checker cells, mixed is half and half.
SceneSpec reference_scene(SceneProfile profile, int train_views, uint64_t seed);

SceneProfile profile_from_name(const std::string& name);  // UsageError if unknown
const char* profile_name(SceneProfile profile);

}  // namespace sdigs
