#include "sdigs/io/config.hpp"
#include "sdigs/io/depth_io.hpp"
#include "sdigs/io/image_io.hpp"
#include "sdigs/io/manifest.hpp"
#include "sdigs/io/ply_io.hpp"

#include "sdigs/core/error.hpp"
#include "sdigs/mdbscan/segment.hpp"
#include "sdigs/splat/gaussians.hpp"
#include "sdigs/synth/synth.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace sdigs;
namespace fs = std::filesystem;

namespace {

// Unique scratch directory per test case, removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    char name[64];
    std::snprintf(name, sizeof(name), "sdigs_io_test_%d_%d", getpid(),
                  counter++);
    path = fs::temp_directory_path() / name;
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

SyntheticBundle small_bundle() {
  return generate(reference_scene(SceneProfile::mixed, 3, 21));
}

}  // namespace

TEST_CASE("png round trip is lossless for quantized images") {
  TempDir dir;
  const SyntheticBundle bundle = small_bundle();
  const Image& original = bundle.views[0].image;
  write_png(dir.file("view.png"), original);
  const Image loaded = read_png(dir.file("view.png"));
  REQUIRE(loaded.same_shape(original));
  CHECK(loaded.data == original.data);
}

TEST_CASE("png write clamps out-of-range values") {
  TempDir dir;
  Image img(4, 2);
  img.set_pixel(0, 0, Vec3(-0.5, 1.7, 0.5));
  write_png(dir.file("clamp.png"), img);
  const Image loaded = read_png(dir.file("clamp.png"));
  CHECK(loaded.at(0, 0, 0) == 0.0);
  CHECK(loaded.at(0, 0, 1) == 1.0);
  CHECK(loaded.at(0, 0, 2) == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("png read rejects missing and malformed files") {
  TempDir dir;
  CHECK_THROWS_AS(read_png(dir.file("absent.png")), DataError);
  std::ofstream(dir.file("junk.png")) << "this is not a png";
  CHECK_THROWS_AS(read_png(dir.file("junk.png")), DataError);
}

TEST_CASE("segmentation png round trip with sidecar") {
  TempDir dir;
  const SyntheticBundle bundle = small_bundle();
  const SegmentationMap map =
      segment_image(bundle.views[0].image, SegmentationParams{});
  REQUIRE(map.num_segments > 1);
  write_segmentation_png(dir.file("seg.png"), map);
  CHECK(fs::exists(dir.file("seg.png.meta")));

  const SegmentationMap loaded = read_segmentation_png(dir.file("seg.png"));
  CHECK(loaded.width == map.width);
  CHECK(loaded.height == map.height);
  CHECK(loaded.labels == map.labels);
  CHECK(loaded.num_segments == map.num_segments);
}

TEST_CASE("segmentation png rejects more than 65535 segments") {
  TempDir dir;
  SegmentationMap map;
  map.width = 2;
  map.height = 2;
  map.labels = {0, 1, 2, 3};
  map.num_segments = 70000;
  CHECK_THROWS_AS(write_segmentation_png(dir.file("big.png"), map), DataError);
}

TEST_CASE("segmentation png requires a consistent sidecar") {
  TempDir dir;
  SegmentationMap map;
  map.width = 2;
  map.height = 1;
  map.labels = {0, 1};
  map.num_segments = 2;
  write_segmentation_png(dir.file("seg.png"), map);

  fs::remove(dir.file("seg.png.meta"));
  CHECK_THROWS_AS(read_segmentation_png(dir.file("seg.png")), DataError);
  std::ofstream(dir.file("seg.png.meta")) << "num_segments=1\n";
  CHECK_THROWS_AS(read_segmentation_png(dir.file("seg.png")), DataError);
}

TEST_CASE("depth raster round trips through float32") {
  TempDir dir;
  const std::vector<double> depth = {4.2, 1.0, 0.333333333333333, 1e-3,
                                     2.5,  9.75, 123.625, 0.1};
  write_depth_raster(dir.file("d.bin"), depth, 4, 2);
  const DepthRaster loaded = read_depth_raster(dir.file("d.bin"));
  CHECK(loaded.width == 4);
  CHECK(loaded.height == 2);
  REQUIRE(loaded.values.size() == depth.size());
  for (size_t i = 0; i < depth.size(); ++i)
    CHECK(loaded.values[i] == static_cast<double>(static_cast<float>(depth[i])));
}

TEST_CASE("depth raster validates header and payload") {
  TempDir dir;
  std::ofstream(dir.file("bad.bin")) << "not a depth header\n";
  CHECK_THROWS_AS(read_depth_raster(dir.file("bad.bin")), DataError);

  write_depth_raster(dir.file("short.bin"), {1.0, 2.0}, 2, 1);
  fs::resize_file(dir.file("short.bin"),
                  fs::file_size(dir.file("short.bin")) - 3);
  CHECK_THROWS_AS(read_depth_raster(dir.file("short.bin")), DataError);

  CHECK_THROWS_AS(write_depth_raster(dir.file("x.bin"), {1.0}, 2, 1),
                  UsageError);
}

TEST_CASE("filtered ply round trips doubles bit-exactly") {
  TempDir dir;
  const SyntheticBundle bundle = small_bundle();
  const PointCloud cloud = PointCloud::concatenate(bundle.dense_points);
  write_filtered_ply(dir.file("cloud.ply"), cloud);
  const PointCloud loaded = read_filtered_ply(dir.file("cloud.ply"));
  REQUIRE(loaded.size() == cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    CHECK(loaded.positions[i] == cloud.positions[i]);  // bit-exact doubles
    CHECK(loaded.colors[i] == cloud.colors[i]);        // /255-grid colors
  }
  CHECK(loaded.source_views[0] == 0);  // provenance is not serialized
}

TEST_CASE("filtered ply reader is strict about the header") {
  TempDir dir;
  PointCloud cloud;
  cloud.positions = {Vec3(1, 2, 3)};
  cloud.colors = {Vec3(0, 0.5, 1)};
  cloud.source_views = {1};
  cloud.source_pixels = {Pixel(0, 0)};
  write_filtered_ply(dir.file("one.ply"), cloud);

  // Swap the red/green property lines: the strict reader must refuse.
  std::vector<char> bytes = slurp(dir.file("one.ply"));
  std::string text(bytes.begin(), bytes.end());
  const size_t red = text.find("property uchar red");
  REQUIRE(red != std::string::npos);
  text.replace(red, 18, "property uchar grn");
  std::ofstream(dir.file("tampered.ply"), std::ios::binary) << text;
  CHECK_THROWS_AS(read_filtered_ply(dir.file("tampered.ply")), DataError);

  // Truncating the payload must also be detected.
  fs::resize_file(dir.file("one.ply"), fs::file_size(dir.file("one.ply")) - 1);
  CHECK_THROWS_AS(read_filtered_ply(dir.file("one.ply")), DataError);
}

TEST_CASE("cluster count sidecar round trips") {
  TempDir dir;
  const std::vector<int64_t> counts = {512, 1, 37, 0, 99};
  write_cluster_counts(dir.file("counts.txt"), counts);
  CHECK(read_cluster_counts(dir.file("counts.txt")) == counts);

  std::ofstream(dir.file("bad.txt")) << "clusters: 3\n";
  CHECK_THROWS_AS(read_cluster_counts(dir.file("bad.txt")), DataError);
}

TEST_CASE("gaussian ply read-back matches through float32") {
  TempDir dir;
  const SyntheticBundle bundle = small_bundle();
  PointCloud cloud = PointCloud::concatenate(bundle.dense_points);
  cloud.positions.resize(64);  // small model is enough here
  cloud.colors.resize(64);
  cloud.source_views.resize(64);
  cloud.source_pixels.resize(64);
  const GaussianSet model = init_gaussians(cloud);

  write_gaussian_ply(dir.file("model.ply"), model);
  const GaussianSet loaded = read_gaussian_ply(dir.file("model.ply"));
  REQUIRE(loaded.count == model.count);
  auto f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (int64_t i = 0; i < model.count; ++i) {
    for (int c = 0; c < 3; ++c) {
      CHECK(loaded.positions[3 * i + c] == f32(model.positions[3 * i + c]));
      CHECK(loaded.log_scales[3 * i + c] == f32(model.log_scales[3 * i + c]));
      CHECK(loaded.colors[3 * i + c] ==
            doctest::Approx(model.colors[3 * i + c]).epsilon(1e-6));
    }
    CHECK(loaded.opacity_logits[i] == f32(model.opacity_logits[i]));
    for (int c = 0; c < 4; ++c)
      CHECK(loaded.rotations[4 * i + c] == f32(model.rotations[4 * i + c]));
  }
}

TEST_CASE("gaussian ply write-read-write is byte stable") {
  TempDir dir;
  GaussianSet model;
  model.resize(3);
  for (int64_t i = 0; i < 3; ++i) {
    for (int c = 0; c < 3; ++c) {
      model.positions[3 * i + c] = 0.1 * static_cast<double>(3 * i + c) - 0.7;
      model.log_scales[3 * i + c] = -2.0 + 0.01 * static_cast<double>(i + c);
      model.colors[3 * i + c] = (static_cast<double>(i) + 0.3) / 4.0;
    }
    model.opacity_logits[i] = -2.1972245773362196 + 0.1 * i;
    model.rotations[4 * i] = 1.0;
  }
  write_gaussian_ply(dir.file("a.ply"), model);
  const GaussianSet once = read_gaussian_ply(dir.file("a.ply"));
  write_gaussian_ply(dir.file("b.ply"), once);
  CHECK(slurp(dir.file("a.ply")) == slurp(dir.file("b.ply")));
}

TEST_CASE("bundle export and manifest round trip") {
  TempDir dir;
  const SyntheticBundle bundle = small_bundle();
  const std::string manifest_path =
      write_bundle(dir.file("scene"), "mixed", bundle);
  CHECK(fs::exists(manifest_path));

  const SceneManifest manifest = read_manifest(manifest_path);
  CHECK(manifest.scene_name == "mixed");
  REQUIRE(manifest.views.size() == bundle.views.size());

  // Poses and intrinsics survive the text format bit-exactly (%.17g).
  for (size_t v = 0; v < manifest.views.size(); ++v) {
    CHECK(manifest.views[v].pose.rotation == bundle.views[v].pose.rotation);
    CHECK(manifest.views[v].pose.translation ==
          bundle.views[v].pose.translation);
    CHECK(manifest.views[v].intrinsics.fx == bundle.views[v].intrinsics.fx);
  }

  // Images survive bit-exactly; depth through float32; the lifted points
  // stay on the generating surfaces well within the 1e-6 contract.
  const std::vector<CameraView> views = load_views(manifest);
  for (size_t v = 0; v < views.size(); ++v)
    CHECK(views[v].image.data == bundle.views[v].image.data);
  const std::vector<std::vector<double>> depths = load_depths(manifest);
  const std::vector<DensePointSet> dense = lift_dense_points(views, depths);
  for (size_t v = 0; v < dense.size(); ++v) {
    REQUIRE(dense[v].size() == bundle.dense_points[v].size());
    for (size_t p = 0; p < dense[v].size(); p += 97) {
      const double err =
          (dense[v].positions[p] - bundle.dense_points[v].positions[p]).norm();
      CHECK(err <= 1e-5);  // float32 depth at scene scale ~ 1e-6
    }
  }
}

TEST_CASE("manifest validation rejects broken inputs") {
  TempDir dir;
  const SyntheticBundle bundle = small_bundle();
  const std::string manifest_path =
      write_bundle(dir.file("scene"), "mixed", bundle);

  SUBCASE("missing image file") {
    fs::remove(dir.file("scene") + "/view_001.png");
    CHECK_THROWS_AS(read_manifest(manifest_path), DataError);
  }
  SUBCASE("missing depth file") {
    fs::remove(dir.file("scene") + "/view_002.depth");
    CHECK_THROWS_AS(read_manifest(manifest_path), DataError);
  }
  SUBCASE("improper rotation") {
    std::ofstream out(dir.file("bad.txt"));
    out << "sdigs-manifest 1\nviews 1\nview 1\nimage ../scene/view_001.png\n"
        << "intrinsics 70 70 31.5 31.5 64 64\n"
        << "rotation 2 0 0 0 1 0 0 0 1\ntranslation 0 0 0\n";
    out.close();
    CHECK_THROWS_AS(read_manifest(dir.file("bad.txt")), DataError);
  }
  SUBCASE("non-sequential view ordinals") {
    std::ofstream out(dir.file("bad.txt"));
    out << "sdigs-manifest 1\nviews 1\nview 2\nimage ../scene/view_001.png\n"
        << "intrinsics 70 70 31.5 31.5 64 64\n"
        << "rotation 1 0 0 0 1 0 0 0 1\ntranslation 0 0 0\n";
    out.close();
    CHECK_THROWS_AS(read_manifest(dir.file("bad.txt")), DataError);
  }
  SUBCASE("incomplete view block") {
    std::ofstream out(dir.file("bad.txt"));
    out << "sdigs-manifest 1\nviews 1\nview 1\nimage ../scene/view_001.png\n"
        << "rotation 1 0 0 0 1 0 0 0 1\ntranslation 0 0 0\n";
    out.close();
    CHECK_THROWS_AS(read_manifest(dir.file("bad.txt")), DataError);
  }
  SUBCASE("unknown line") {
    std::ofstream out(dir.file("bad.txt"));
    out << "sdigs-manifest 1\nviews 1\nshutter_speed fast\n";
    out.close();
    CHECK_THROWS_AS(read_manifest(dir.file("bad.txt")), DataError);
  }
  SUBCASE("unsupported version") {
    std::ofstream out(dir.file("bad.txt"));
    out << "sdigs-manifest 2\n";
    out.close();
    CHECK_THROWS_AS(read_manifest(dir.file("bad.txt")), DataError);
  }
}

TEST_CASE("views without depth name the remedy") {
  TempDir dir;
  const SyntheticBundle bundle = small_bundle();
  write_bundle(dir.file("scene"), "mixed", bundle);
  // Strip the depth lines from the manifest.
  std::ifstream in(dir.file("scene") + "/manifest.txt");
  std::string text, line;
  while (std::getline(in, line))
    if (line.rfind("depth ", 0) != 0) text += line + "\n";
  in.close();
  std::ofstream(dir.file("scene") + "/manifest.txt") << text;

  const SceneManifest manifest =
      read_manifest(dir.file("scene") + "/manifest.txt");
  try {
    load_depths(manifest);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("synth") != std::string::npos);
  }
}

TEST_CASE("config parsing and typed getters") {
  const ConfigMap config = ConfigMap::parse_text(
      "# pipeline settings\n"
      "color_eps = 0.05\n"
      "label_dimension = 6\n"
      "n_max = 256   # cap\n"
      "seed = 18446744073709551615\n"
      "profile = mixed\n");
  CHECK(config.get_double("color_eps", 0.08) == 0.05);
  CHECK(config.get_int("label_dimension", 3) == 6);
  CHECK(config.get_int64("n_max", 512) == 256);
  CHECK(config.get_uint64("seed", 0) == UINT64_MAX);
  CHECK(config.get_string("profile", "flat_dominant") == "mixed");
  CHECK(config.get_double("absent", 1.5) == 1.5);
  CHECK(config.unconsumed().empty());

  const ConfigMap partial = ConfigMap::parse_text("alpha = 1\nbeta = 2\n");
  partial.get_int("alpha", 0);
  CHECK(partial.unconsumed() == std::vector<std::string>{"beta"});
}

TEST_CASE("config rejects malformed text") {
  CHECK_THROWS_AS(ConfigMap::parse_text("just words\n"), UsageError);
  CHECK_THROWS_AS(ConfigMap::parse_text("a = 1\na = 2\n"), UsageError);
  CHECK_THROWS_AS(ConfigMap::parse_text("= 3\n"), UsageError);
  CHECK_THROWS_AS(ConfigMap::parse_text("a =\n"), UsageError);
  const ConfigMap config = ConfigMap::parse_text("eps = fast\nn = 1.5\n");
  CHECK_THROWS_AS(config.get_double("eps", 0.0), UsageError);
  CHECK_THROWS_AS(config.get_int("n", 0), UsageError);
  TempDir dir;
  CHECK_THROWS_AS(ConfigMap::parse_file(dir.file("absent.cfg")), DataError);
}

TEST_CASE("loss csv round trips") {
  TempDir dir;
  const std::vector<double> trace = {0.5, 0.25, 0.12500000000000011, 1e-300};
  write_loss_csv(dir.file("loss.csv"), trace);
  CHECK(read_loss_csv(dir.file("loss.csv")) == trace);

  std::vector<char> bytes = slurp(dir.file("loss.csv"));
  const std::string text(bytes.begin(), bytes.end());
  CHECK(text.rfind("iteration,loss\n", 0) == 0);

  std::ofstream(dir.file("bad.csv")) << "step,value\n0,1\n";
  CHECK_THROWS_AS(read_loss_csv(dir.file("bad.csv")), DataError);
  std::ofstream(dir.file("gap.csv")) << "iteration,loss\n1,0.5\n";
  CHECK_THROWS_AS(read_loss_csv(dir.file("gap.csv")), DataError);
}
