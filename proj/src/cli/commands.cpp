#include "sdigs/cli/commands.hpp"

#include "sdigs/core/error.hpp"
#include "sdigs/downsample/downsample.hpp"
#include "sdigs/io/config.hpp"
#include "sdigs/io/image_io.hpp"
#include "sdigs/io/manifest.hpp"
#include "sdigs/io/ply_io.hpp"
#include "sdigs/labeling/labeling.hpp"
#include "sdigs/mdbscan/segment.hpp"
#include "sdigs/splat/gaussians.hpp"
#include "sdigs/splat/metrics.hpp"
#include "sdigs/splat/optimize.hpp"
#include "sdigs/splat/render.hpp"
#include "sdigs/synth/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace sdigs {
namespace {

// Everything a command can read from the config file, pre-resolved against
// built-in defaults. Flag overrides are applied by the individual commands.
struct Settings {
  SegmentationParams seg;
  int label_dimension = 3;
  int64_t n_max = 512;
  uint64_t seed = 0;
  int threads = 1;
  OptimizerConfig opt;
};

Connectivity connectivity_from_int(int value) {
  if (value == 4) return Connectivity::four;
  if (value == 8) return Connectivity::eight;
  throw UsageError("connectivity must be 4 or 8");
}

Settings load_settings(const GlobalOptions& global) {
  Settings s;
  if (!global.config_path.empty()) {
    const ConfigMap config = ConfigMap::parse_file(global.config_path);
    s.seg.color_eps = config.get_double("color_eps", s.seg.color_eps);
    s.seg.min_pts = config.get_int("min_pts", s.seg.min_pts);
    s.seg.connectivity = connectivity_from_int(config.get_int("connectivity", 4));
    s.label_dimension = config.get_int("label_dimension", s.label_dimension);
    s.n_max = config.get_int64("n_max", s.n_max);
    s.seed = config.get_uint64("seed", s.seed);
    s.threads = config.get_int("threads", s.threads);
    s.opt.iterations = config.get_int("iterations", s.opt.iterations);
    s.opt.lr_position = config.get_double("lr_position", s.opt.lr_position);
    s.opt.lr_scale = config.get_double("lr_scale", s.opt.lr_scale);
    s.opt.lr_rotation = config.get_double("lr_rotation", s.opt.lr_rotation);
    s.opt.lr_opacity = config.get_double("lr_opacity", s.opt.lr_opacity);
    s.opt.lr_color = config.get_double("lr_color", s.opt.lr_color);
    s.opt.lr_pose = config.get_double("lr_pose", s.opt.lr_pose);
    s.opt.refine_poses = config.get_int("refine_poses", 1) != 0;
    const std::vector<std::string> leftovers = config.unconsumed();
    if (!leftovers.empty())
      throw UsageError("config: unknown key '" + leftovers.front() + "'");
  }
  if (global.seed) s.seed = *global.seed;
  if (global.threads) {
    if (*global.threads < 1) throw UsageError("threads must be at least 1");
    s.threads = *global.threads;
  }
  s.opt.threads = s.threads;
  return s;
}

fs::path ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory " + out);
  return fs::path(out);
}

struct StageTimer {
  std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(now - mark).count();
    mark = now;
    return ms;
  }
};

std::vector<SegmentationMap> segment_views(const std::vector<CameraView>& views,
                                           const SegmentationParams& params) {
  std::vector<SegmentationMap> maps;
  maps.reserve(views.size());
  for (const CameraView& view : views)
    maps.push_back(segment_image(view.image, params));
  return maps;
}

std::string view_file(const char* stem, size_t ordinal, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.%s", stem, ordinal, ext);
  return buf;
}

// Metrics are computed on the 8-bit image the render subcommand would emit,
// so eval numbers match what an external tool measures on the written PNGs.
Image quantized(Image image) {
  for (double& c : image.data)
    c = std::llround(std::min(1.0, std::max(0.0, c)) * 255.0) / 255.0;
  return image;
}

// PSNR can be the +inf sentinel, which JSON numbers cannot carry; those
// values travel as the same string format_metric prints.
ordered_json json_metric(double value) {
  if (std::isfinite(value)) return value;
  return format_metric(value);
}

void write_json(const fs::path& path, const ordered_json& document) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string());
  out << document.dump(2) << "\n";
  if (!out.flush()) throw DataError("write failed for " + path.string());
}

int checked_dimension(int dimension) {
  if (dimension < 2)
    throw UsageError("label dimension must be at least 2");
  return dimension;
}

std::vector<int> checked_ordinals(const std::vector<int>& ordinals,
                                  size_t total) {
  for (int v : ordinals)
    if (v < 1 || static_cast<size_t>(v) > total)
      throw UsageError("view ordinal " + std::to_string(v) +
                       " outside [1, " + std::to_string(total) + "]");
  return ordinals;
}

}  // namespace

void cmd_synth(const GlobalOptions& global, const SynthOptions& options) {
  const Settings s = load_settings(global);
  SceneSpec spec =
      reference_scene(profile_from_name(options.profile), options.views, s.seed);
  spec.holdout_views = options.holdout;
  spec.noise_std = options.noise_std;
  const SyntheticBundle bundle = generate(spec, s.threads);
  const std::string manifest = write_bundle(global.out, options.profile, bundle);
  std::printf("synth: %zu views (%d train) of profile %s, seed %llu\n",
              bundle.views.size(), bundle.train_count, options.profile.c_str(),
              static_cast<unsigned long long>(s.seed));
  std::printf("synth: manifest %s\n", manifest.c_str());
}

void cmd_segment(const GlobalOptions& global, const SegmentOptions& options) {
  Settings s = load_settings(global);
  if (options.color_eps) s.seg.color_eps = *options.color_eps;
  if (options.min_pts) s.seg.min_pts = *options.min_pts;
  if (options.connectivity)
    s.seg.connectivity = connectivity_from_int(*options.connectivity);

  const SceneManifest manifest = read_manifest(options.manifest);
  const std::vector<CameraView> views = load_views(manifest);
  const fs::path out = ensure_out_dir(global.out);
  const std::vector<SegmentationMap> maps = segment_views(views, s.seg);
  for (size_t v = 0; v < maps.size(); ++v) {
    const std::string name = view_file("segmentation", v + 1, "png");
    write_segmentation_png((out / name).string(), maps[v]);
    std::printf("segment: view %zu -> %d segments (%s)\n", v + 1,
                maps[v].num_segments, name.c_str());
  }
}

void cmd_pipeline(const GlobalOptions& global, const PipelineOptions& options) {
  Settings s = load_settings(global);
  if (options.dimension) s.label_dimension = *options.dimension;
  if (options.n_max) s.n_max = *options.n_max;
  if (options.color_eps) s.seg.color_eps = *options.color_eps;
  if (options.min_pts) s.seg.min_pts = *options.min_pts;
  checked_dimension(s.label_dimension);
  if (s.n_max < 1) throw UsageError("n_max must be at least 1");
  for (int d : options.sweep_dims) checked_dimension(d);

  const SceneManifest manifest = read_manifest(options.manifest);
  const std::vector<CameraView> views = load_views(manifest);
  const std::vector<std::vector<double>> depths = load_depths(manifest);
  const std::vector<DensePointSet> dense = lift_dense_points(views, depths);
  const PointCloud cloud = PointCloud::concatenate(dense);
  const fs::path out = ensure_out_dir(global.out);

  StageTimer timer;
  const std::vector<SegmentationMap> maps = segment_views(views, s.seg);
  const double ms_segment = timer.lap_ms();

  const std::vector<LabelVector> labels =
      label_cloud(cloud, views, maps, s.label_dimension, s.threads);
  const double ms_label = timer.lap_ms();

  const ClusterPartition partition = build_partition(labels);
  const double ms_cluster = timer.lap_ms();

  const FilteredCloud filtered =
      downsample_clusters(cloud, partition, SamplerConfig{s.n_max, s.seed});
  const double ms_downsample = timer.lap_ms();

  const GaussianSet gaussians = init_gaussians(filtered.points);
  const double ms_init = timer.lap_ms();

  for (size_t v = 0; v < maps.size(); ++v)
    write_segmentation_png(
        (out / view_file("segmentation", v + 1, "png")).string(), maps[v]);
  write_filtered_ply((out / "filtered.ply").string(), filtered.points);
  write_cluster_counts((out / "filtered_clusters.txt").string(),
                       filtered.per_cluster_counts);
  write_gaussian_ply((out / "gaussians_init.ply").string(), gaussians);

  const double ratio =
      1.0 - static_cast<double>(filtered.size()) / static_cast<double>(cloud.size());

  ordered_json report;
  report["schema"] = "sdigs-report 1";
  report["scene"] = manifest.scene_name;
  report["views"] = views.size();
  report["color_eps"] = s.seg.color_eps;
  report["min_pts"] = s.seg.min_pts;
  report["connectivity"] = static_cast<int>(s.seg.connectivity);
  report["label_dimension"] = s.label_dimension;
  report["n_max"] = s.n_max;
  report["seed"] = s.seed;
  ordered_json segments = ordered_json::array();
  for (const SegmentationMap& map : maps) segments.push_back(map.num_segments);
  report["segments_per_view"] = segments;
  report["points_before"] = cloud.size();
  report["cluster_count"] = partition.cluster_count();
  report["points_after"] = filtered.size();
  report["reduction_ratio"] = ratio;
  report["stage_ms"] = {{"segment", ms_segment},
                        {"label", ms_label},
                        {"cluster", ms_cluster},
                        {"downsample", ms_downsample},
                        {"init", ms_init}};

  // Optional label-dimension sweep over the same cloud and segmentations;
  // the context-view lists are nested as the dimension grows.
  if (!options.sweep_dims.empty()) {
    ordered_json sweep = ordered_json::array();
    std::string table = "dimension clusters retained reduction_ratio\n";
    for (int d : options.sweep_dims) {
      const std::vector<LabelVector> sweep_labels =
          label_cloud(cloud, views, maps, d, s.threads);
      const ClusterPartition sweep_partition = build_partition(sweep_labels);
      const FilteredCloud sweep_filtered = downsample_clusters(
          cloud, sweep_partition, SamplerConfig{s.n_max, s.seed});
      const double sweep_ratio = 1.0 - static_cast<double>(sweep_filtered.size()) /
                                           static_cast<double>(cloud.size());
      sweep.push_back({{"dimension", d},
                       {"clusters", sweep_partition.cluster_count()},
                       {"retained", sweep_filtered.size()},
                       {"reduction_ratio", sweep_ratio}});
      char row[96];
      std::snprintf(row, sizeof(row), "%d %zu %zu %.6f\n", d,
                    sweep_partition.cluster_count(), sweep_filtered.size(),
                    sweep_ratio);
      table += row;
    }
    report["sweep"] = sweep;
    std::ofstream sweep_out(out / "sweep.txt");
    sweep_out << table;
    if (!sweep_out.flush()) throw DataError("write failed for sweep.txt");
    std::printf("%s", table.c_str());
  }

  write_json(out / "report.json", report);
  std::printf("pipeline: %zu points -> %zu clusters -> %zu retained "
              "(reduction %.6f)\n",
              cloud.size(), partition.cluster_count(), filtered.size(), ratio);
  std::printf("pipeline: report %s\n", (out / "report.json").c_str());
}

void cmd_train(const GlobalOptions& global, const TrainOptions& options) {
  Settings s = load_settings(global);
  if (options.iterations) s.opt.iterations = *options.iterations;
  if (s.opt.iterations < 1)
    throw UsageError("train: iterations must be at least 1");
  if (options.no_pose_refinement) s.opt.refine_poses = false;

  const SceneManifest manifest = read_manifest(options.manifest);
  const std::vector<CameraView> views = load_views(manifest);
  GaussianSet gaussians = read_gaussian_ply(options.gaussians);
  const fs::path out = ensure_out_dir(global.out);

  const TrainResult result = optimize(gaussians, views, s.opt);

  write_loss_csv((out / "loss.csv").string(), result.loss_trace);
  write_gaussian_ply((out / "gaussians_final.ply").string(), gaussians);
  SceneManifest refined = manifest;
  for (size_t v = 0; v < refined.views.size(); ++v)
    refined.views[v].pose = result.refined_poses[v];
  write_manifest((out / "manifest_refined.txt").string(), refined);

  std::printf("train: %d iterations, loss %.8g -> %.8g\n", s.opt.iterations,
              result.loss_trace.front(), result.loss_trace.back());
  std::printf("train: model %s\n", (out / "gaussians_final.ply").c_str());
}

void cmd_eval(const GlobalOptions& global, const EvalOptions& options) {
  load_settings(global);  // validates config/flags even though unused here
  if (options.views.empty())
    throw UsageError("eval: at least one view ordinal is required");

  const SceneManifest manifest = read_manifest(options.manifest);
  const std::vector<CameraView> views = load_views(manifest);
  const std::vector<int> ordinals = checked_ordinals(options.views, views.size());
  const GaussianSet model = read_gaussian_ply(options.gaussians);
  const bool compare = !options.compare.empty();
  GaussianSet other;
  if (compare) other = read_gaussian_ply(options.compare);

  ordered_json rows = ordered_json::array();
  if (compare)
    std::printf("view  psnr_a      ssim_a    psnr_b      ssim_b    "
                "delta_psnr  delta_ssim\n");
  else
    std::printf("view  psnr        ssim\n");

  for (int ordinal : ordinals) {
    const CameraView& view = views[ordinal - 1];
    const Image image_a =
        quantized(render(model, view.intrinsics, view.pose).color);
    const double psnr_a = psnr(image_a, view.image);
    const double ssim_a = ssim(image_a, view.image);
    ordered_json row = {{"view", ordinal},
                        {"psnr", json_metric(psnr_a)},
                        {"ssim", json_metric(ssim_a)}};
    if (compare) {
      const Image image_b =
          quantized(render(other, view.intrinsics, view.pose).color);
      const double psnr_b = psnr(image_b, view.image);
      const double ssim_b = ssim(image_b, view.image);
      row["psnr_b"] = json_metric(psnr_b);
      row["ssim_b"] = json_metric(ssim_b);
      row["delta_psnr"] = json_metric(psnr_b - psnr_a);
      row["delta_ssim"] = json_metric(ssim_b - ssim_a);
      std::printf("%-5d %-11s %-9s %-11s %-9s %-11s %s\n", ordinal,
                  format_metric(psnr_a).c_str(), format_metric(ssim_a).c_str(),
                  format_metric(psnr_b).c_str(), format_metric(ssim_b).c_str(),
                  format_metric(psnr_b - psnr_a).c_str(),
                  format_metric(ssim_b - ssim_a).c_str());
    } else {
      std::printf("%-5d %-11s %s\n", ordinal, format_metric(psnr_a).c_str(),
                  format_metric(ssim_a).c_str());
    }
    rows.push_back(row);
  }

  ordered_json document;
  document["schema"] = "sdigs-eval 1";
  document["model"] = options.gaussians;
  document["model_bytes"] = static_cast<uint64_t>(fs::file_size(options.gaussians));
  if (compare) {
    document["compare"] = options.compare;
    document["compare_bytes"] =
        static_cast<uint64_t>(fs::file_size(options.compare));
  }
  document["rows"] = rows;
  std::printf("model bytes: %llu\n",
              static_cast<unsigned long long>(fs::file_size(options.gaussians)));
  if (compare)
    std::printf("compare bytes: %llu\n", static_cast<unsigned long long>(
                                             fs::file_size(options.compare)));

  const fs::path out = ensure_out_dir(global.out);
  write_json(out / "eval.json", document);
}

void cmd_render(const GlobalOptions& global, const RenderOptions& options) {
  load_settings(global);
  const SceneManifest manifest = read_manifest(options.manifest);
  const std::vector<CameraView> views = load_views(manifest);
  std::vector<int> ordinals = options.views;
  if (ordinals.empty())
    for (size_t v = 1; v <= views.size(); ++v)
      ordinals.push_back(static_cast<int>(v));
  checked_ordinals(ordinals, views.size());

  const GaussianSet model = read_gaussian_ply(options.gaussians);
  const fs::path out = ensure_out_dir(global.out);
  for (int ordinal : ordinals) {
    const CameraView& view = views[ordinal - 1];
    const RenderResult result = render(model, view.intrinsics, view.pose);
    const std::string name = view_file("render", ordinal, "png");
    write_png((out / name).string(), result.color);
    std::printf("render: view %d -> %s\n", ordinal, (out / name).c_str());
  }
}

}  // namespace sdigs
