#pragma once

#include "sdigs/core/types.hpp"
#include "sdigs/synth/synth.hpp"

#include <string>
#include <vector>

namespace sdigs {

// One manifest record per view. Paths are stored relative to the manifest
// file on disk; read_manifest resolves them against the manifest directory.
struct ManifestView {
  std::string image_path;
  std::string depth_path;  // empty when the view carries no depth raster
  CameraIntrinsics intrinsics;
  CameraPose pose;
};

struct SceneManifest {
  std::string scene_name = "scene";
  std::string units = "arbitrary";
  std::vector<ManifestView> views;
};

// Line-oriented text format, version-tagged `sdigs-manifest 1`, numbers
// printed with enough digits for exact double round trips.
void write_manifest(const std::string& path, const SceneManifest& manifest);

// Parses, resolves paths, and validates: referenced files must exist,
// intrinsics must be valid, rotations proper within 1e-9. Throws DataError.
SceneManifest read_manifest(const std::string& path);

// Loads every view image; ordinals are assigned 1..N in manifest order.
// Image dimensions must match the manifest intrinsics.
std::vector<CameraView> load_views(const SceneManifest& manifest);

// Loads every depth raster. Throws DataError when a view has no depth path
// (dense points are underivable then; the caller names the remedy).
std::vector<std::vector<double>> load_depths(const SceneManifest& manifest);

// Backprojects every pixel of every view through its depth map, mirroring
// the synthetic generator's dense lift.
std::vector<DensePointSet> lift_dense_points(
    const std::vector<CameraView>& views,
    const std::vector<std::vector<double>>& depths);

// Writes images, depth rasters, and manifests for a synthetic bundle into
// out_dir (created if needed). Train views go to manifest.txt; holdout views
// (if any) go to manifest_holdout.txt so training inputs never include them.
// Returns the train manifest path.
std::string write_bundle(const std::string& out_dir,
                         const std::string& scene_name,
                         const SyntheticBundle& bundle);

}  // namespace sdigs
