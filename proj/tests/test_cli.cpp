#include "sdigs/core/error.hpp"
#include "sdigs/io/manifest.hpp"
#include "sdigs/io/ply_io.hpp"
#include "sdigs/kernels/kernels.hpp"
#include "sdigs/splat/gaussians.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace sdigs;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Scratch area shared by all cases; populated once with a synth scene and a
// pipeline run so the slower commands only execute a single time.
struct Fixture {
  fs::path root;
  std::string scene;    // train manifest path
  std::string holdout;  // holdout manifest path
  std::string pipe;     // pipeline output dir

  Fixture() {
    char name[64];
    std::snprintf(name, sizeof(name), "sdigs_cli_test_%d", getpid());
    root = fs::temp_directory_path() / name;
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Fixture() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  std::string dir(const std::string& name) const {
    return (root / name).string();
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

int run_cli(const std::string& args, const std::string& stdout_file = "") {
  std::string command = std::string(SDIGS_CLI_PATH) + " " + args;
  command += stdout_file.empty() ? " > /dev/null" : " > " + stdout_file;
  command += " 2> /dev/null";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  return json::parse(in);
}

// Generates the shared scene and pipeline outputs on first use.
void ensure_scene() {
  Fixture& f = fixture();
  if (!f.scene.empty()) return;
  REQUIRE(run_cli("synth --profile mixed --views 3 --holdout 2 --seed 7 --out " +
                  f.dir("scene")) == 0);
  f.scene = f.dir("scene") + "/manifest.txt";
  f.holdout = f.dir("scene") + "/manifest_holdout.txt";
  REQUIRE(run_cli("pipeline --manifest " + f.scene + " --seed 7 --out " +
                  f.dir("pipe")) == 0);
  f.pipe = f.dir("pipe");
}

}  // namespace

TEST_CASE("synth writes a complete bundle and is byte-deterministic") {
  ensure_scene();
  Fixture& f = fixture();
  for (int v = 1; v <= 5; ++v) {
    char png[32], depth[32];
    std::snprintf(png, sizeof(png), "view_%03d.png", v);
    std::snprintf(depth, sizeof(depth), "view_%03d.depth", v);
    CHECK(fs::exists(fs::path(f.dir("scene")) / png));
    CHECK(fs::exists(fs::path(f.dir("scene")) / depth));
  }
  CHECK(fs::exists(f.scene));
  CHECK(fs::exists(f.holdout));
  CHECK(read_manifest(f.scene).views.size() == 3);
  CHECK(read_manifest(f.holdout).views.size() == 2);

  REQUIRE(run_cli("synth --profile mixed --views 3 --holdout 2 --seed 7 --out " +
                  f.dir("scene2")) == 0);
  for (const char* name : {"view_001.png", "view_003.depth", "manifest.txt"})
    CHECK(slurp(f.dir("scene") + "/" + name) ==
          slurp(f.dir("scene2") + "/" + name));

  // A different seed must change the images.
  REQUIRE(run_cli("synth --profile mixed --views 3 --holdout 2 --seed 8 --out " +
                  f.dir("scene3")) == 0);
  CHECK(slurp(f.dir("scene") + "/view_001.png") !=
        slurp(f.dir("scene3") + "/view_001.png"));
}

TEST_CASE("synth rejects invalid view counts with a usage exit") {
  CHECK(run_cli("synth --views 1 --out " + fixture().dir("bad")) == 1);
  CHECK(run_cli("synth --profile cityscape --out " + fixture().dir("bad")) == 1);
}

TEST_CASE("segment writes per-view label maps") {
  ensure_scene();
  Fixture& f = fixture();
  REQUIRE(run_cli("segment --manifest " + f.scene + " --out " + f.dir("seg")) ==
          0);
  for (int v = 1; v <= 3; ++v) {
    char name[40];
    std::snprintf(name, sizeof(name), "segmentation_%03d.png", v);
    CHECK(fs::exists(fs::path(f.dir("seg")) / name));
    CHECK(fs::exists((fs::path(f.dir("seg")) / name).string() + ".meta"));
  }
}

TEST_CASE("pipeline report is self-consistent with its artifacts") {
  ensure_scene();
  Fixture& f = fixture();
  const json report = load_json(f.pipe + "/report.json");

  const PointCloud filtered = read_filtered_ply(f.pipe + "/filtered.ply");
  CHECK(report["points_after"].get<size_t>() == filtered.size());
  CHECK(report["points_before"].get<size_t>() == 3u * 64u * 64u);

  const double ratio = report["reduction_ratio"].get<double>();
  const double recomputed =
      1.0 - static_cast<double>(report["points_after"].get<size_t>()) /
                static_cast<double>(report["points_before"].get<size_t>());
  CHECK(ratio == recomputed);  // exact: same doubles the writer used

  const GaussianSet init = read_gaussian_ply(f.pipe + "/gaussians_init.ply");
  CHECK(static_cast<size_t>(init.count) == filtered.size());

  CHECK(report["segments_per_view"].size() == 3);
  CHECK(report["cluster_count"].get<size_t>() >= 1);
  for (const char* stage : {"segment", "label", "cluster", "downsample", "init"})
    CHECK(report["stage_ms"][stage].get<double>() >= 0.0);
}

TEST_CASE("pipeline outputs are byte-identical across reruns and threads") {
  ensure_scene();
  Fixture& f = fixture();
  REQUIRE(run_cli("pipeline --manifest " + f.scene + " --seed 7 --out " +
                  f.dir("pipe2")) == 0);
  REQUIRE(run_cli("pipeline --manifest " + f.scene + " --seed 7 --threads 4 "
                  "--out " + f.dir("pipe4")) == 0);
  for (const char* name :
       {"filtered.ply", "filtered_clusters.txt", "gaussians_init.ply",
        "segmentation_001.png", "segmentation_002.png.meta"}) {
    CHECK(slurp(f.pipe + "/" + name) == slurp(f.dir("pipe2") + "/" + name));
    CHECK(slurp(f.pipe + "/" + name) == slurp(f.dir("pipe4") + "/" + name));
  }
}

TEST_CASE("pipeline with a cap above the cloud size keeps every point") {
  ensure_scene();
  Fixture& f = fixture();
  REQUIRE(run_cli("pipeline --manifest " + f.scene + " --n-max 100000000 "
                  "--seed 7 --out " + f.dir("pipe_identity")) == 0);
  const json report = load_json(f.dir("pipe_identity") + "/report.json");
  CHECK(report["points_after"].get<size_t>() ==
        report["points_before"].get<size_t>());
  CHECK(report["reduction_ratio"].get<double>() == 0.0);
}

TEST_CASE("pipeline dimension sweep emits one table") {
  ensure_scene();
  Fixture& f = fixture();
  REQUIRE(run_cli("pipeline --manifest " + f.scene + " --sweep-dims 2,3 "
                  "--seed 7 --out " + f.dir("pipe_sweep")) == 0);
  const json report = load_json(f.dir("pipe_sweep") + "/report.json");
  REQUIRE(report.contains("sweep"));
  REQUIRE(report["sweep"].size() == 2);
  CHECK(report["sweep"][0]["dimension"].get<int>() == 2);
  CHECK(report["sweep"][1]["dimension"].get<int>() == 3);
  CHECK(fs::exists(f.dir("pipe_sweep") + "/sweep.txt"));

  std::ifstream table(f.dir("pipe_sweep") + "/sweep.txt");
  std::string header;
  std::getline(table, header);
  CHECK(header == "dimension clusters retained reduction_ratio");
}

TEST_CASE("pipeline rejects bad flags and configs with usage exits") {
  ensure_scene();
  Fixture& f = fixture();
  CHECK(run_cli("pipeline --manifest " + f.scene + " --dimension 1 --out " +
                f.dir("bad")) == 1);
  CHECK(run_cli("pipeline --manifest " + f.scene + " --n-max 0 --out " +
                f.dir("bad")) == 1);

  std::ofstream(f.dir("scene") + "/bad.cfg") << "warp_speed = 9\n";
  CHECK(run_cli("pipeline --manifest " + f.scene + " --config " +
                f.dir("scene") + "/bad.cfg --out " + f.dir("bad")) == 1);
}

TEST_CASE("config file values apply and flags override them") {
  ensure_scene();
  Fixture& f = fixture();
  std::ofstream(f.dir("scene") + "/pipe.cfg")
      << "n_max = 64\nlabel_dimension = 2\n";
  REQUIRE(run_cli("pipeline --manifest " + f.scene + " --config " +
                  f.dir("scene") + "/pipe.cfg --seed 7 --out " +
                  f.dir("pipe_cfg")) == 0);
  const json report = load_json(f.dir("pipe_cfg") + "/report.json");
  CHECK(report["n_max"].get<int64_t>() == 64);
  CHECK(report["label_dimension"].get<int>() == 2);

  REQUIRE(run_cli("pipeline --manifest " + f.scene + " --config " +
                  f.dir("scene") + "/pipe.cfg --dimension 3 --seed 7 --out " +
                  f.dir("pipe_cfg2")) == 0);
  CHECK(load_json(f.dir("pipe_cfg2") + "/report.json")["label_dimension"]
            .get<int>() == 3);
}

TEST_CASE("train writes a full loss trace and is deterministic") {
  ensure_scene();
  Fixture& f = fixture();
  const std::string init = f.pipe + "/gaussians_init.ply";
  REQUIRE(run_cli("train --manifest " + f.scene + " --gaussians " + init +
                  " --iterations 40 --out " + f.dir("train")) == 0);

  std::ifstream csv(f.dir("train") + "/loss.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "iteration,loss");
  std::vector<double> losses;
  while (std::getline(csv, line)) {
    size_t iter;
    double loss;
    REQUIRE(std::sscanf(line.c_str(), "%zu,%lf", &iter, &loss) == 2);
    losses.push_back(loss);
  }
  REQUIRE(losses.size() == 40);
  CHECK(losses.back() < losses.front());
  CHECK(fs::exists(f.dir("train") + "/gaussians_final.ply"));
  CHECK(fs::exists(f.dir("train") + "/manifest_refined.txt"));
  CHECK(read_manifest(f.dir("train") + "/manifest_refined.txt").views.size() ==
        3);

  REQUIRE(run_cli("train --manifest " + f.scene + " --gaussians " + init +
                  " --iterations 40 --out " + f.dir("train2")) == 0);
  CHECK(slurp(f.dir("train") + "/loss.csv") ==
        slurp(f.dir("train2") + "/loss.csv"));
  CHECK(slurp(f.dir("train") + "/gaussians_final.ply") ==
        slurp(f.dir("train2") + "/gaussians_final.ply"));
}

TEST_CASE("train maps numerical failures to exit 3") {
  ensure_scene();
  Fixture& f = fixture();
  GaussianSet poisoned = read_gaussian_ply(f.pipe + "/gaussians_init.ply");
  poisoned.colors[0] = std::numeric_limits<double>::quiet_NaN();
  write_gaussian_ply(f.dir("scene") + "/poisoned.ply", poisoned);
  CHECK(run_cli("train --manifest " + f.scene + " --gaussians " +
                f.dir("scene") + "/poisoned.ply --iterations 3 --out " +
                f.dir("bad")) == 3);
}

TEST_CASE("train validates iteration count") {
  ensure_scene();
  Fixture& f = fixture();
  CHECK(run_cli("train --manifest " + f.scene + " --gaussians " + f.pipe +
                "/gaussians_init.ply --iterations 0 --out " + f.dir("bad")) ==
        1);
}

TEST_CASE("eval emits metric rows and validates its view list") {
  ensure_scene();
  Fixture& f = fixture();
  const std::string model = f.pipe + "/gaussians_init.ply";
  REQUIRE(run_cli("eval --manifest " + f.holdout + " --gaussians " + model +
                      " --views 1,2 --out " + f.dir("eval"),
                  f.dir("eval_stdout.txt")) == 0);
  const json metrics = load_json(f.dir("eval") + "/eval.json");
  REQUIRE(metrics["rows"].size() == 2);
  CHECK(metrics["rows"][0]["view"].get<int>() == 1);
  CHECK(metrics["rows"][0]["psnr"].get<double>() > 0.0);
  CHECK(metrics["rows"][0]["ssim"].get<double>() <= 1.0);
  CHECK(metrics["model_bytes"].get<uint64_t>() ==
        fs::file_size(model));

  CHECK(run_cli("eval --manifest " + f.holdout + " --gaussians " + model +
                " --views 7 --out " + f.dir("bad")) == 1);
  CHECK(run_cli("eval --manifest " + f.holdout + " --gaussians " + model +
                " --out " + f.dir("bad")) == 1);
}

TEST_CASE("eval prints the infinity sentinel for identical images") {
  ensure_scene();
  Fixture& f = fixture();
  const std::string model = f.pipe + "/gaussians_init.ply";
  // Render view 1, then build a manifest whose ground truth IS that render:
  // the evaluated PSNR must be the +inf sentinel, printed as "inf".
  REQUIRE(run_cli("render --manifest " + f.scene + " --gaussians " + model +
                  " --views 1 --out " + f.dir("render_gt")) == 0);
  SceneManifest manifest = read_manifest(f.scene);
  manifest.views.resize(1);
  manifest.views[0].image_path = f.dir("render_gt") + "/render_001.png";
  manifest.views[0].depth_path.clear();
  write_manifest(f.dir("render_gt") + "/manifest_self.txt", manifest);

  REQUIRE(run_cli("eval --manifest " + f.dir("render_gt") +
                      "/manifest_self.txt --gaussians " + model +
                      " --views 1 --out " + f.dir("eval_self"),
                  f.dir("eval_self_stdout.txt")) == 0);
  const std::vector<char> bytes = slurp(f.dir("eval_self_stdout.txt"));
  const std::string stdout_text(bytes.begin(), bytes.end());
  CHECK(stdout_text.find("inf") != std::string::npos);
  CHECK(load_json(f.dir("eval_self") + "/eval.json")["rows"][0]["psnr"]
            .get<std::string>() == "inf");
}

TEST_CASE("eval compare mode emits delta columns") {
  ensure_scene();
  Fixture& f = fixture();
  REQUIRE(run_cli("eval --manifest " + f.holdout + " --gaussians " + f.pipe +
                  "/gaussians_init.ply --compare " + f.pipe +
                  "/gaussians_init.ply --views 1 --out " + f.dir("eval_cmp")) ==
          0);
  const json metrics = load_json(f.dir("eval_cmp") + "/eval.json");
  CHECK(metrics["rows"][0].contains("delta_psnr"));
  CHECK(metrics["rows"][0]["delta_ssim"].get<double>() == 0.0);
  CHECK(metrics["compare_bytes"].get<uint64_t>() ==
        metrics["model_bytes"].get<uint64_t>());
}

TEST_CASE("render defaults to all views and respects selections") {
  ensure_scene();
  Fixture& f = fixture();
  const std::string model = f.pipe + "/gaussians_init.ply";
  REQUIRE(run_cli("render --manifest " + f.scene + " --gaussians " + model +
                  " --out " + f.dir("render_all")) == 0);
  for (int v = 1; v <= 3; ++v) {
    char name[32];
    std::snprintf(name, sizeof(name), "render_%03d.png", v);
    CHECK(fs::exists(fs::path(f.dir("render_all")) / name));
  }
  CHECK(run_cli("render --manifest " + f.scene + " --gaussians " + model +
                " --views 9 --out " + f.dir("bad")) == 1);
}

TEST_CASE("kernel backend selection is equivalence-checked end to end") {
  ensure_scene();
  Fixture& f = fixture();
  const std::string base = "train --manifest " + f.scene + " --gaussians " +
                           f.pipe + "/gaussians_init.ply --iterations 10 ";
  REQUIRE(run_cli(base + "--kernels scalar --out " + f.dir("train_scalar")) ==
          0);
  if (kernels::avx2_supported()) {
    REQUIRE(run_cli(base + "--kernels avx2 --out " + f.dir("train_avx2")) == 0);
    CHECK(slurp(f.dir("train_scalar") + "/gaussians_final.ply") ==
          slurp(f.dir("train_avx2") + "/gaussians_final.ply"));
    CHECK(slurp(f.dir("train_scalar") + "/loss.csv") ==
          slurp(f.dir("train_avx2") + "/loss.csv"));
  }
  CHECK(run_cli(base + "--kernels neon --out " + f.dir("bad")) == 1);
}

TEST_CASE("missing subcommand or unknown flags exit with usage status") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("synth --unknown-flag 3") == 1);
  CHECK(run_cli("--help", fixture().dir("help.txt")) == 0);
}

TEST_CASE("missing or malformed inputs exit with data status") {
  Fixture& f = fixture();
  CHECK(run_cli("pipeline --manifest " + f.dir("nowhere") + "/manifest.txt" +
                " --out " + f.dir("bad")) == 2);
  std::ofstream(f.dir("scene") + "/garbage.ply") << "not a ply\n";
  CHECK(run_cli("eval --manifest " + fixture().holdout + " --gaussians " +
                f.dir("scene") + "/garbage.ply --views 1 --out " +
                f.dir("bad")) == 2);
}
