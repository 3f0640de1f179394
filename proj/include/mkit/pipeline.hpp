#pragma once

#include <cstdint>
#include <string>

#include "mkit/error.hpp"
#include "mkit/metrics.hpp"
#include "mkit/revision.hpp"

namespace mkit {

/// Settings for a full end-to-end run, usually loaded from a key=value
/// file. Paths are used as written (relative paths resolve against the
/// process working directory).
struct PipelineConfig {
  // Scene inputs.
  std::string catalog;      // required
  std::string navgrid;      // required
  std::string prompts_dir;  // required unless both plot_file and orders_file are given
  std::string grid;         // optional: load this occupancy grid instead of synthesizing

  // Motion inputs.
  std::string motion_a;  // required
  std::string motion_b;  // required
  std::string hhi_a;     // optional interaction clips appended per character
  std::string hhi_b;

  // Optional canned text, bypassing the corresponding client call.
  std::string plot_file;
  std::string orders_file;

  // Optional hand retrieval inputs; the stage runs when all three are set.
  std::string index;
  std::string query_vec;
  std::string clips_dir;

  std::string out_dir = "pipeline_out";
  bool mock = false;
  std::uint64_t seed = 0;

  // Timing and revision knobs.
  int buffer_frames = 4;
  double clip_seconds = 1.25;
  int fps = 40;
  double hhp_threshold = 0.02;
  int max_iterations = 8;

  // Scene synthesis knobs (used when no grid file is given).
  int sdf_dims = 128;
  double sdf_box = 3.0;
  double sdf_t_floor = 0.05;
  double sdf_ceiling_low = 2.0;
  double sdf_ceiling_high = 2.8;
  int sdf_k_min = 0;
  int sdf_k_max = 10;
  double sdf_extent_min = 0.2;
  double sdf_extent_max = 0.8;
};

PipelineConfig load_pipeline_config(const std::string& path);

struct PipelineResult {
  int stages_completed = 0;
  std::string out_dir;
  MetricsReport metrics;
  RevisionReport revision;
};

/// Run every stage, writing numbered artifacts into config.out_dir. On
/// failure the artifacts produced so far stay in place and the error
/// message names the failing stage.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace mkit
