#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdigs {

// Options shared by every subcommand. Flag values beat config-file values,
// which beat built-in defaults; std::optional marks "flag was given".
struct GlobalOptions {
  std::string out = "out";
  std::string config_path;  // empty = no config file
  std::optional<uint64_t> seed;
  std::optional<int> threads;
};

struct SynthOptions {
  std::string profile = "mixed";
  int views = 3;
  int holdout = 0;
  double noise_std = 0.0;
};

struct SegmentOptions {
  std::string manifest;
  std::optional<double> color_eps;
  std::optional<int> min_pts;
  std::optional<int> connectivity;
};

struct PipelineOptions {
  std::string manifest;
  std::optional<int> dimension;
  std::optional<int64_t> n_max;
  std::optional<double> color_eps;
  std::optional<int> min_pts;
  std::vector<int> sweep_dims;  // extra label dimensions to tabulate
};

struct TrainOptions {
  std::string manifest;
  std::string gaussians;
  std::optional<int> iterations;
  bool no_pose_refinement = false;
};

struct EvalOptions {
  std::string manifest;
  std::string gaussians;
  std::string compare;     // optional second model for a delta table
  std::vector<int> views;  // 1-based manifest ordinals, required
};

struct RenderOptions {
  std::string manifest;
  std::string gaussians;
  std::vector<int> views;  // empty = all manifest views
};

// Command bodies. Errors surface as the shared exception taxonomy; the
// executable maps them to exit codes (usage 1, data 2, numerical 3).
void cmd_synth(const GlobalOptions& global, const SynthOptions& options);
void cmd_segment(const GlobalOptions& global, const SegmentOptions& options);
void cmd_pipeline(const GlobalOptions& global, const PipelineOptions& options);
void cmd_train(const GlobalOptions& global, const TrainOptions& options);
void cmd_eval(const GlobalOptions& global, const EvalOptions& options);
void cmd_render(const GlobalOptions& global, const RenderOptions& options);

}  // namespace sdigs
