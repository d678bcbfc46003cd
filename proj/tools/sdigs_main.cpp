#include "sdigs/cli/commands.hpp"

#include "sdigs/core/error.hpp"
#include "sdigs/kernels/kernels.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <string>

namespace {

sdigs::kernels::Backend backend_from_name(const std::string& name) {
  if (name == "scalar") return sdigs::kernels::Backend::scalar;
  if (name == "avx2") return sdigs::kernels::Backend::avx2;
  if (name == "auto") return sdigs::kernels::Backend::automatic;
  throw sdigs::UsageError("--kernels must be one of: scalar, avx2, auto (got '" +
                          name + "')");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sdigs;

  CLI::App app{
      "Segmentation-driven initialization pipeline for sparse-view Gaussian "
      "splatting"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  std::string kernels;
  uint64_t seed_value = 0;
  int threads_value = 1;
  app.add_option("--out", global.out, "Output directory")
      ->capture_default_str();
  app.add_option("--config", global.config_path,
                 "Flat key = value configuration file");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_value, "Seed for all random choices");
  CLI::Option* threads_opt =
      app.add_option("--threads", threads_value, "Worker thread count");
  app.add_option("--kernels", kernels,
                 "Compute backend: scalar, avx2, or auto (default: "
                 "SDIGS_KERNELS or auto)");

  std::function<void()> run;

  SynthOptions synth;
  CLI::App* cmd = app.add_subcommand(
      "synth", "Generate a synthetic multi-view scene bundle");
  cmd->add_option("--profile", synth.profile,
                  "Scene profile: flat_dominant, texture_dominant, mixed")
      ->capture_default_str();
  cmd->add_option("--views", synth.views, "Training view count (>= 2)")
      ->capture_default_str();
  cmd->add_option("--holdout", synth.holdout,
                  "Held-out view count (arc gap midpoints)")
      ->capture_default_str();
  cmd->add_option("--noise", synth.noise_std,
                  "Gaussian pixel noise standard deviation");
  cmd->callback([&] { run = [&] { cmd_synth(global, synth); }; });

  SegmentOptions segment;
  cmd = app.add_subcommand("segment", "Segment every view of a manifest");
  cmd->add_option("--manifest", segment.manifest, "Scene manifest path")
      ->required();
  double eps_value = 0.0;
  int min_pts_value = 0, connectivity_value = 0;
  CLI::Option* eps_opt = cmd->add_option("--eps", eps_value,
                                         "RGB distance threshold");
  CLI::Option* min_pts_opt =
      cmd->add_option("--min-pts", min_pts_value, "Core-pixel neighbor count");
  CLI::Option* connectivity_opt = cmd->add_option(
      "--connectivity", connectivity_value, "Pixel adjacency: 4 or 8");
  cmd->callback([&, eps_opt, min_pts_opt, connectivity_opt] {
    run = [&, eps_opt, min_pts_opt, connectivity_opt] {
      if (*eps_opt) segment.color_eps = eps_value;
      if (*min_pts_opt) segment.min_pts = min_pts_value;
      if (*connectivity_opt) segment.connectivity = connectivity_value;
      cmd_segment(global, segment);
    };
  });

  PipelineOptions pipeline;
  cmd = app.add_subcommand(
      "pipeline", "Segment, label, cluster, downsample, and init Gaussians");
  cmd->add_option("--manifest", pipeline.manifest, "Scene manifest path")
      ->required();
  int dimension_value = 0;
  int64_t n_max_value = 0;
  double pipe_eps_value = 0.0;
  int pipe_min_pts_value = 0;
  CLI::Option* dimension_opt =
      cmd->add_option("--dimension", dimension_value, "Label dimension D >= 2");
  CLI::Option* n_max_opt =
      cmd->add_option("--n-max", n_max_value, "Per-cluster retention cap");
  CLI::Option* pipe_eps_opt =
      cmd->add_option("--eps", pipe_eps_value, "RGB distance threshold");
  CLI::Option* pipe_min_pts_opt =
      cmd->add_option("--min-pts", pipe_min_pts_value, "Core neighbor count");
  cmd->add_option("--sweep-dims", pipeline.sweep_dims,
                  "Comma-separated label dimensions to tabulate")
      ->delimiter(',');
  cmd->callback([&, dimension_opt, n_max_opt, pipe_eps_opt, pipe_min_pts_opt] {
    run = [&, dimension_opt, n_max_opt, pipe_eps_opt, pipe_min_pts_opt] {
      if (*dimension_opt) pipeline.dimension = dimension_value;
      if (*n_max_opt) pipeline.n_max = n_max_value;
      if (*pipe_eps_opt) pipeline.color_eps = pipe_eps_value;
      if (*pipe_min_pts_opt) pipeline.min_pts = pipe_min_pts_value;
      cmd_pipeline(global, pipeline);
    };
  });

  TrainOptions train;
  cmd = app.add_subcommand("train", "Optimize a Gaussian model photometrically");
  cmd->add_option("--manifest", train.manifest, "Scene manifest path")
      ->required();
  cmd->add_option("--gaussians", train.gaussians, "Initial Gaussian PLY")
      ->required();
  int iterations_value = 0;
  CLI::Option* iterations_opt =
      cmd->add_option("--iterations", iterations_value, "Adam step count");
  cmd->add_flag("--no-pose-refinement", train.no_pose_refinement,
                "Keep all camera poses fixed");
  cmd->callback([&, iterations_opt] {
    run = [&, iterations_opt] {
      if (*iterations_opt) train.iterations = iterations_value;
      cmd_train(global, train);
    };
  });

  EvalOptions eval;
  cmd = app.add_subcommand("eval", "Report PSNR/SSIM on selected views");
  cmd->add_option("--manifest", eval.manifest, "Scene manifest path")
      ->required();
  cmd->add_option("--gaussians", eval.gaussians, "Gaussian PLY to evaluate")
      ->required();
  cmd->add_option("--views", eval.views,
                  "Comma-separated 1-based view ordinals")
      ->required()
      ->delimiter(',');
  cmd->add_option("--compare", eval.compare,
                  "Second Gaussian PLY for a delta table");
  cmd->callback([&] { run = [&] { cmd_eval(global, eval); }; });

  RenderOptions render;
  cmd = app.add_subcommand("render", "Render manifest views from a model");
  cmd->add_option("--manifest", render.manifest, "Scene manifest path")
      ->required();
  cmd->add_option("--gaussians", render.gaussians, "Gaussian PLY to render")
      ->required();
  cmd->add_option("--views", render.views,
                  "Comma-separated 1-based view ordinals (default: all)")
      ->delimiter(',');
  cmd->callback([&] { run = [&] { cmd_render(global, render); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // all command-line parse problems are usage errors
  }
  if (*seed_opt) global.seed = seed_value;
  if (*threads_opt) global.threads = threads_value;

  try {
    if (!kernels.empty())
      sdigs::kernels::select_backend(backend_from_name(kernels));
    run();
    return 0;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error in %s: %s\n",
                 e.parameter_group().c_str(), e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
