#include "sdigs/io/manifest.hpp"

#include "sdigs/core/error.hpp"
#include "sdigs/io/depth_io.hpp"
#include "sdigs/io/image_io.hpp"
#include "sdigs/core/camera.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace sdigs {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool is_token(const std::string& s) {
  return !s.empty() && s.find_first_of(" \t\n") == std::string::npos;
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw DataError("manifest " + path + ": " + why);
}

}  // namespace

void write_manifest(const std::string& path, const SceneManifest& manifest) {
  if (!is_token(manifest.scene_name) || !is_token(manifest.units))
    throw UsageError("write_manifest: scene name and units must be single tokens");
  if (manifest.views.empty())
    throw UsageError("write_manifest: manifest needs at least one view");
  std::ofstream out(path);
  if (!out) throw DataError("write_manifest: cannot open " + path);

  out << "sdigs-manifest 1\n";
  out << "scene " << manifest.scene_name << "\n";
  out << "units " << manifest.units << "\n";
  out << "views " << manifest.views.size() << "\n";
  for (size_t i = 0; i < manifest.views.size(); ++i) {
    const ManifestView& view = manifest.views[i];
    if (!is_token(view.image_path))
      throw UsageError("write_manifest: image path must be a single token");
    out << "view " << (i + 1) << "\n";
    out << "image " << view.image_path << "\n";
    out << "intrinsics " << fmt(view.intrinsics.fx) << " "
        << fmt(view.intrinsics.fy) << " " << fmt(view.intrinsics.cx) << " "
        << fmt(view.intrinsics.cy) << " " << view.intrinsics.width << " "
        << view.intrinsics.height << "\n";
    out << "rotation";
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << " " << fmt(view.pose.rotation(r, c));
    out << "\n";
    out << "translation";
    for (int c = 0; c < 3; ++c) out << " " << fmt(view.pose.translation[c]);
    out << "\n";
    if (!view.depth_path.empty()) {
      if (!is_token(view.depth_path))
        throw UsageError("write_manifest: depth path must be a single token");
      out << "depth " << view.depth_path << "\n";
    }
  }
  if (!out.flush()) throw DataError("write_manifest: write failed " + path);
}

SceneManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_manifest: cannot open " + path);
  const fs::path dir = fs::path(path).parent_path();

  std::string line;
  if (!std::getline(in, line) || line != "sdigs-manifest 1")
    fail(path, "missing or unsupported version line");

  SceneManifest manifest;
  size_t declared_views = 0;
  ManifestView* view = nullptr;
  // Per-view bookkeeping: every block must carry image/intrinsics/pose.
  bool has_image = false, has_k = false, has_r = false, has_t = false;
  auto close_view = [&]() {
    if (!view) return;
    if (!has_image || !has_k || !has_r || !has_t)
      fail(path, "incomplete view block");
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream tokens(line);
    std::string key;
    tokens >> key;
    if (key == "scene") {
      tokens >> manifest.scene_name;
    } else if (key == "units") {
      tokens >> manifest.units;
    } else if (key == "views") {
      tokens >> declared_views;
      if (tokens.fail() || declared_views == 0)
        fail(path, "bad views line: " + line);
    } else if (key == "view") {
      close_view();
      size_t ordinal = 0;
      tokens >> ordinal;
      if (tokens.fail() || ordinal != manifest.views.size() + 1)
        fail(path, "view ordinals must be sequential from 1: " + line);
      manifest.views.emplace_back();
      view = &manifest.views.back();
      has_image = has_k = has_r = has_t = false;
    } else if (view && key == "image") {
      tokens >> view->image_path;
      has_image = true;
    } else if (view && key == "depth") {
      tokens >> view->depth_path;
    } else if (view && key == "intrinsics") {
      CameraIntrinsics& k = view->intrinsics;
      tokens >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height;
      if (tokens.fail()) fail(path, "bad intrinsics line: " + line);
      has_k = true;
    } else if (view && key == "rotation") {
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) tokens >> view->pose.rotation(r, c);
      if (tokens.fail()) fail(path, "bad rotation line: " + line);
      has_r = true;
    } else if (view && key == "translation") {
      for (int c = 0; c < 3; ++c) tokens >> view->pose.translation[c];
      if (tokens.fail()) fail(path, "bad translation line: " + line);
      has_t = true;
    } else {
      fail(path, "unexpected line: " + line);
    }
  }
  close_view();
  if (manifest.views.empty()) fail(path, "no views");
  if (declared_views != manifest.views.size())
    fail(path, "declared view count does not match view blocks");

  for (ManifestView& v : manifest.views) {
    v.image_path = (dir / v.image_path).string();
    if (!fs::exists(v.image_path))
      fail(path, "missing image file " + v.image_path);
    if (!v.depth_path.empty()) {
      v.depth_path = (dir / v.depth_path).string();
      if (!fs::exists(v.depth_path))
        fail(path, "missing depth file " + v.depth_path);
    }
    if (!v.intrinsics.valid()) fail(path, "invalid intrinsics");
    if (!v.pose.valid(1e-9)) fail(path, "rotation is not a proper rotation");
  }
  return manifest;
}

std::vector<CameraView> load_views(const SceneManifest& manifest) {
  std::vector<CameraView> views;
  views.reserve(manifest.views.size());
  for (size_t i = 0; i < manifest.views.size(); ++i) {
    const ManifestView& mv = manifest.views[i];
    CameraView view;
    view.index = static_cast<int>(i) + 1;
    view.intrinsics = mv.intrinsics;
    view.pose = mv.pose;
    view.image = read_png(mv.image_path);
    if (view.image.width != mv.intrinsics.width ||
        view.image.height != mv.intrinsics.height)
      throw DataError("load_views: image dims mismatch for " + mv.image_path);
    views.push_back(std::move(view));
  }
  return views;
}

std::vector<std::vector<double>> load_depths(const SceneManifest& manifest) {
  std::vector<std::vector<double>> depths;
  depths.reserve(manifest.views.size());
  for (const ManifestView& mv : manifest.views) {
    if (mv.depth_path.empty())
      throw DataError(
          "load_depths: view has no depth raster; dense points are "
          "underivable. Generate data with the synth command or provide an "
          "external dense source.");
    DepthRaster raster = read_depth_raster(mv.depth_path);
    if (raster.width != mv.intrinsics.width ||
        raster.height != mv.intrinsics.height)
      throw DataError("load_depths: depth dims mismatch for " + mv.depth_path);
    depths.push_back(std::move(raster.values));
  }
  return depths;
}

std::vector<DensePointSet> lift_dense_points(
    const std::vector<CameraView>& views,
    const std::vector<std::vector<double>>& depths) {
  if (views.size() != depths.size())
    throw UsageError("lift_dense_points: views/depths size mismatch");
  std::vector<DensePointSet> sets;
  sets.reserve(views.size());
  for (size_t v = 0; v < views.size(); ++v) {
    const CameraView& view = views[v];
    DensePointSet dense;
    dense.view_index = view.index;
    const int64_t npx = view.image.pixel_count();
    if (static_cast<int64_t>(depths[v].size()) != npx)
      throw UsageError("lift_dense_points: depth size mismatch");
    dense.positions.reserve(npx);
    dense.colors.reserve(npx);
    dense.source_pixels.reserve(npx);
    for (int y = 0; y < view.image.height; ++y) {
      for (int x = 0; x < view.image.width; ++x) {
        const double depth = depths[v][static_cast<size_t>(y) * view.image.width + x];
        dense.positions.push_back(
            backproject(x, y, depth, view.intrinsics, view.pose));
        dense.colors.push_back(view.image.pixel(x, y));
        dense.source_pixels.push_back(Pixel(x, y));
      }
    }
    sets.push_back(std::move(dense));
  }
  return sets;
}

std::string write_bundle(const std::string& out_dir,
                         const std::string& scene_name,
                         const SyntheticBundle& bundle) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("write_bundle: cannot create " + out_dir);

  SceneManifest train, holdout;
  train.scene_name = holdout.scene_name = scene_name;
  for (size_t v = 0; v < bundle.views.size(); ++v) {
    char image_name[32], depth_name[32];
    std::snprintf(image_name, sizeof(image_name), "view_%03zu.png", v + 1);
    std::snprintf(depth_name, sizeof(depth_name), "view_%03zu.depth", v + 1);
    const CameraView& view = bundle.views[v];
    write_png((fs::path(out_dir) / image_name).string(), view.image);
    write_depth_raster((fs::path(out_dir) / depth_name).string(),
                       bundle.depth_maps[v], view.intrinsics.width,
                       view.intrinsics.height);
    ManifestView mv;
    mv.image_path = image_name;
    mv.depth_path = depth_name;
    mv.intrinsics = view.intrinsics;
    mv.pose = view.pose;
    const bool is_train = v < static_cast<size_t>(bundle.train_count);
    (is_train ? train : holdout).views.push_back(mv);
  }
  const std::string manifest_path = (fs::path(out_dir) / "manifest.txt").string();
  write_manifest(manifest_path, train);
  if (!holdout.views.empty())
    write_manifest((fs::path(out_dir) / "manifest_holdout.txt").string(),
                   holdout);
  return manifest_path;
}

}  // namespace sdigs
