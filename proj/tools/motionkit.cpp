// Command-line front end for the motion toolkit: scene synthesis, physical
// metrics, junction blending and segment alignment, collision revision,
// hand-clip retrieval, plot scripting, and the combined pipeline.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mkit/commands.hpp"
#include "mkit/llm.hpp"
#include "mkit/metrics.hpp"
#include "mkit/motion.hpp"
#include "mkit/pipeline.hpp"
#include "mkit/retrieval.hpp"
#include "mkit/revision.hpp"
#include "mkit/rng.hpp"
#include "mkit/sdf.hpp"
#include "mkit/sync.hpp"

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mkit::Error(mkit::Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mkit::Error(mkit::Errc::IoError, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw mkit::Error(mkit::Errc::IoError, "write failed for " + path);
}

Eigen::VectorXd load_vector(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  if (vals.empty()) throw mkit::Error(mkit::Errc::ParseError, "no values in " + path);
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size()));
}

std::vector<mkit::TriMesh> load_mesh_dir(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<mkit::TriMesh> meshes;
  meshes.reserve(paths.size());
  for (const auto& p : paths) meshes.push_back(mkit::load_mesh(p));
  if (meshes.empty()) throw mkit::Error(mkit::Errc::EmptyInput, "no mesh files in " + dir);
  return meshes;
}

std::string order_list_string(const std::vector<mkit::Command>& commands) {
  std::string out = "[";
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (i > 0) out += ", ";
    out += mkit::command_to_string(commands[i]);
  }
  return out + "]";
}

/// One character's order list from a file holding either a bare bracketed
/// list or an "Orders <label>: [...]" line.
std::vector<std::string> load_order_strings(const std::string& path) {
  const mkit::CommandScript script = mkit::parse_commands(read_text_file(path));
  std::vector<std::string> out;
  for (const auto& cmd : script.commands.front()) out.push_back(mkit::command_to_string(cmd));
  return out;
}

std::unique_ptr<mkit::LlmClient> make_client(bool mock) {
  if (mock) return std::make_unique<mkit::MockLlmClient>();
  return std::make_unique<mkit::HttpLlmClient>();
}

void emit(const std::string& text, const std::string& file) {
  std::cout << text;
  if (!file.empty()) write_text_file(file, text);
}

// --- scene-synth --------------------------------------------------------------

struct SceneSynthArgs {
  std::string out;
  std::string mode = "planes";
  int dims = 128;
  double size = 3.0;
  double t_floor = 0.05;
  double ceiling_low = 2.0;
  double ceiling_high = 2.8;
  int k_min = 0;
  int k_max = 10;
  double extent_min = 0.2;
  double extent_max = 0.8;
  std::vector<double> center = {0.0, 0.0, 0.0};
  std::vector<std::string> motions;
};

int run_scene_synth(const SceneSynthArgs& args, std::uint64_t seed) {
  mkit::SceneSynthParams params;
  params.dims.setConstant(args.dims);
  params.box_size.setConstant(args.size);
  params.center = Eigen::Vector3d(args.center[0], args.center[1], args.center[2]);
  params.t_floor = args.t_floor;
  params.t_ceiling_low = args.ceiling_low;
  params.t_ceiling_high = args.ceiling_high;
  params.k_min = args.k_min;
  params.k_max = args.k_max;
  params.extent_min = args.extent_min;
  params.extent_max = args.extent_max;
  params.seed = seed;

  std::vector<mkit::MotionSequence> loaded;
  loaded.reserve(args.motions.size());
  for (const auto& path : args.motions) loaded.push_back(mkit::load_motion(path));
  std::vector<const mkit::MotionSequence*> refs;
  for (const auto& seq : loaded) refs.push_back(&seq);
  const mkit::Hull2D hull = mkit::walkable_hull(refs);

  const mkit::SceneSynthResult res = args.mode == "points" ? mkit::synth_scene_points(params, hull)
                                                           : mkit::synth_scene_planes(params, hull);
  mkit::save_grid(res.grid, args.out);

  std::size_t solid = 0;
  for (auto v : res.grid.values) solid += v < 0 ? 1 : 0;
  std::cout << "grid=" << args.out << " t_ceiling=" << fmt(res.t_ceiling) << " patterns="
            << res.patterns.size() << " solid=" << solid << " free=" << (res.grid.values.size() - solid)
            << "\n";
  return 0;
}

// --- metrics ------------------------------------------------------------------

struct MetricsArgs {
  std::string motion_a, motion_b, mesh_a, mesh_b, grid, report;
  mkit::ContactParams contact;
};

int run_metrics(const MetricsArgs& args) {
  const mkit::MotionSequence a = mkit::load_motion(args.motion_a);
  std::optional<mkit::MotionSequence> b;
  if (!args.motion_b.empty()) b = mkit::load_motion(args.motion_b);
  const mkit::SdfGrid grid = mkit::load_grid(args.grid);

  std::string text;
  text += "fs_a=" + fmt(mkit::foot_skate(a, args.contact)) + "\n";
  text += "fp_a=" + fmt(mkit::floor_penetration(a, args.contact)) + "\n";
  const mkit::ScenePenetration sp_a = mkit::scene_penetration(a, grid);
  text += "hsp_a=" + fmt(sp_a.depth) + "\nhsp_indicator_a=" + fmt(sp_a.indicator) + "\n";
  if (b) {
    text += "fs_b=" + fmt(mkit::foot_skate(*b, args.contact)) + "\n";
    text += "fp_b=" + fmt(mkit::floor_penetration(*b, args.contact)) + "\n";
    const mkit::ScenePenetration sp_b = mkit::scene_penetration(*b, grid);
    text += "hsp_b=" + fmt(sp_b.depth) + "\nhsp_indicator_b=" + fmt(sp_b.indicator) + "\n";
  }
  if (!args.mesh_a.empty()) {
    const auto meshes_a = load_mesh_dir(args.mesh_a);
    const auto meshes_b = load_mesh_dir(args.mesh_b);
    text += "hhp=" + fmt(mkit::human_penetration(meshes_a, meshes_b).mean) + "\n";
  } else if (b) {
    text += "hhp=" + fmt(mkit::human_penetration(a, *b).mean) + "\n";
  }

  write_text_file(args.report, text);
  std::cout << text;
  return 0;
}

// --- sync ---------------------------------------------------------------------

struct SyncBlendArgs {
  std::string prev, next, out;
  int buffer = 4;
};

int run_sync_blend(const SyncBlendArgs& args) {
  const mkit::MotionSequence prev = mkit::load_motion(args.prev);
  const mkit::MotionSequence next = mkit::load_motion(args.next);
  const mkit::MotionSequence joined = mkit::blend_junction(prev, next, args.buffer);
  mkit::save_motion(joined, args.out);
  std::cout << "frames=" << joined.length() << " out=" << args.out << "\n";
  return 0;
}

struct SyncAlignArgs {
  std::string orders_a, orders_b, out;
  double clip_seconds = 1.25;
  int fps = 40;
};

int run_sync_align(const SyncAlignArgs& args) {
  const auto segments_a = mkit::segment_orders(load_order_strings(args.orders_a));
  const auto segments_b = mkit::segment_orders(load_order_strings(args.orders_b));
  const auto alignment =
      mkit::align_segment_lengths(segments_a, segments_b, args.clip_seconds, args.fps);
  std::string text;
  for (std::size_t k = 0; k < alignment.size(); ++k) {
    text += "segment=" + std::to_string(k) + " target_frames=" +
            std::to_string(alignment[k].target_frames) + " pad_a=" + std::to_string(alignment[k].pad_a) +
            " pad_b=" + std::to_string(alignment[k].pad_b) + "\n";
  }
  emit(text, args.out);
  return 0;
}

// --- revise -------------------------------------------------------------------

struct ReviseArgs {
  std::string motion_a, motion_b, out_a, out_b, report;
  double threshold = 0.02;
  int max_iter = 8;
};

int run_revise(const ReviseArgs& args) {
  const mkit::MotionSequence a = mkit::load_motion(args.motion_a);
  const mkit::MotionSequence b = mkit::load_motion(args.motion_b);
  const mkit::RevisionResult res = mkit::revise_collisions(a, b, args.threshold, args.max_iter);
  mkit::save_motion(res.a, args.out_a);
  mkit::save_motion(res.b, args.out_b);
  const std::string text = mkit::write_revision_report_text(res.report);
  write_text_file(args.report, text);
  std::cout << text;
  return 0;
}

// --- retrieve-hands -----------------------------------------------------------

struct RetrieveArgs {
  std::string index, query_vec, out, clips_dir;
  int target_len = 0;
};

int run_retrieve(const RetrieveArgs& args, std::uint64_t seed) {
  const mkit::EmbeddingIndex index = mkit::load_index(args.index);
  const mkit::RetrievalResult hit = index.retrieve(load_vector(args.query_vec));
  std::cout << "clip=" << hit.id << " similarity=" << fmt(hit.similarity) << "\n";

  if (!args.out.empty()) {
    const std::string dir =
        args.clips_dir.empty() ? fs::path(args.index).parent_path().string() : args.clips_dir;
    const auto clip = mkit::load_hand_clip((fs::path(dir) / (hit.id + ".hands")).string());
    mkit::Rng rng(seed);
    const int target = args.target_len > 0 ? args.target_len : static_cast<int>(clip.size());
    mkit::save_hand_clip(mkit::fit_clip_length(clip, target, rng), args.out);
    std::cout << "frames=" << target << " out=" << args.out << "\n";
  }
  return 0;
}

// --- plot ---------------------------------------------------------------------

struct PlotArgs {
  std::string catalog;
  std::string prompts = "data/prompts";
  std::string plot_file;    // extract input
  std::string orders_file;  // revise / distribute input
  std::string out;
};

int run_plot_generate(const PlotArgs& args, bool mock) {
  const mkit::SceneCatalog catalog = mkit::load_catalog(args.catalog);
  const mkit::PromptTemplates templates = mkit::load_templates(args.prompts);
  std::string plot = mkit::generate_plot(*make_client(mock), templates, catalog.names());
  if (plot.empty() || plot.back() != '\n') plot += '\n';
  emit(plot, args.out);
  return 0;
}

int run_plot_extract(const PlotArgs& args, bool mock) {
  const mkit::PromptTemplates templates = mkit::load_templates(args.prompts);
  std::string orders =
      mkit::extract_orders(*make_client(mock), templates, read_text_file(args.plot_file));
  if (orders.empty() || orders.back() != '\n') orders += '\n';
  emit(orders, args.out);
  return 0;
}

int run_plot_revise(const PlotArgs& args, bool mock) {
  const mkit::SceneCatalog catalog = mkit::load_catalog(args.catalog);
  const mkit::PromptTemplates templates = mkit::load_templates(args.prompts);
  const mkit::CommandScript script = mkit::parse_commands(read_text_file(args.orders_file));
  if (script.characters.size() != 2) {
    throw mkit::Error(mkit::Errc::BadParams, "revision expects exactly two characters");
  }
  const std::string revised_text =
      mkit::revise_orders(*make_client(mock), templates, order_list_string(script.commands[0]),
                          order_list_string(script.commands[1]));
  const mkit::RevisedScript revised =
      mkit::validate_and_revise(mkit::parse_commands(revised_text), catalog.names());
  for (const auto& w : revised.warnings) {
    std::cerr << "warning: char=" << revised.script.characters[static_cast<std::size_t>(w.character)]
              << " index=" << w.index << " " << w.message << "\n";
  }
  emit(mkit::write_script(revised.script), args.out);
  return 0;
}

int run_plot_distribute(const PlotArgs& args) {
  const mkit::CommandScript script = mkit::parse_commands(read_text_file(args.orders_file));
  emit(mkit::write_queues_text(mkit::distribute(script)), args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motionkit: two-character motion synthesis toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool mock = false;
  std::string config_path;
  app.add_option("--seed", seed, "random seed (default 0)");
  app.add_flag("--mock", mock, "use the deterministic offline text client");
  app.add_option("--config", config_path, "pipeline configuration file");

  // scene-synth
  SceneSynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("scene-synth", "synthesize an occupancy grid scene");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--out", synth.out, "output grid path")->required();
  synth_cmd->add_option("--mode", synth.mode, "planes or points")
      ->check(CLI::IsMember({"planes", "points"}));
  synth_cmd->add_option("--dims", synth.dims, "grid nodes per axis");
  synth_cmd->add_option("--size", synth.size, "box edge length (m)");
  synth_cmd->add_option("--t-floor", synth.t_floor, "floor thickness (m)");
  synth_cmd->add_option("--ceiling-low", synth.ceiling_low, "ceiling range low (m)");
  synth_cmd->add_option("--ceiling-high", synth.ceiling_high, "ceiling range high (m)");
  synth_cmd->add_option("--k-min", synth.k_min, "minimum obstacle count");
  synth_cmd->add_option("--k-max", synth.k_max, "maximum obstacle count");
  synth_cmd->add_option("--extent-min", synth.extent_min, "minimum obstacle semi-extent (m)");
  synth_cmd->add_option("--extent-max", synth.extent_max, "maximum obstacle semi-extent (m)");
  synth_cmd->add_option("--center", synth.center, "box center x y z")->expected(3);
  synth_cmd->add_option("--motion", synth.motions, "motion file whose footprint stays walkable");

  // metrics
  MetricsArgs metrics;
  CLI::App* metrics_cmd = app.add_subcommand("metrics", "physical plausibility metrics");
  metrics_cmd->fallthrough();
  metrics_cmd->add_option("--motion-a", metrics.motion_a, "first motion file")->required();
  metrics_cmd->add_option("--motion-b", metrics.motion_b, "second motion file");
  CLI::Option* mesh_a_opt =
      metrics_cmd->add_option("--mesh-a", metrics.mesh_a, "directory of per-frame meshes for A");
  CLI::Option* mesh_b_opt =
      metrics_cmd->add_option("--mesh-b", metrics.mesh_b, "directory of per-frame meshes for B");
  mesh_a_opt->needs(mesh_b_opt);
  mesh_b_opt->needs(mesh_a_opt);
  metrics_cmd->add_option("--grid", metrics.grid, "occupancy grid file")->required();
  metrics_cmd->add_option("--report", metrics.report, "key=value report output path")->required();
  metrics_cmd->add_option("--height-eps", metrics.contact.height_eps, "ground contact height (m)");
  metrics_cmd->add_option("--ground-z", metrics.contact.ground_z, "ground plane height (m)");

  // sync blend | sync align
  CLI::App* sync_cmd = app.add_subcommand("sync", "two-character synchronization helpers");
  sync_cmd->require_subcommand(1);
  sync_cmd->fallthrough();

  SyncBlendArgs sync_blend;
  CLI::App* blend_cmd = sync_cmd->add_subcommand("blend", "ease one motion into the next");
  blend_cmd->fallthrough();
  blend_cmd->add_option("--prev", sync_blend.prev, "motion to continue from")->required();
  blend_cmd->add_option("--next", sync_blend.next, "motion to append")->required();
  blend_cmd->add_option("--buffer", sync_blend.buffer, "blended frames at the junction");
  blend_cmd->add_option("--out", sync_blend.out, "output motion path")->required();

  SyncAlignArgs sync_align;
  CLI::App* align_cmd = sync_cmd->add_subcommand("align", "size paired order segments");
  align_cmd->fallthrough();
  align_cmd->add_option("--orders-a", sync_align.orders_a, "first order-list file")->required();
  align_cmd->add_option("--orders-b", sync_align.orders_b, "second order-list file")->required();
  align_cmd->add_option("--clip-seconds", sync_align.clip_seconds, "seconds budgeted per command");
  align_cmd->add_option("--fps", sync_align.fps, "frame rate for the command budget");
  align_cmd->add_option("--out", sync_align.out, "also write the table here");

  // revise
  ReviseArgs revise;
  CLI::App* revise_cmd = app.add_subcommand("revise", "retime a pair to remove collisions");
  revise_cmd->fallthrough();
  revise_cmd->add_option("--motion-a", revise.motion_a, "first motion file")->required();
  revise_cmd->add_option("--motion-b", revise.motion_b, "second motion file")->required();
  revise_cmd->add_option("--threshold", revise.threshold, "penetration fraction that counts as collision");
  revise_cmd->add_option("--max-iter", revise.max_iter, "maximum revision passes");
  revise_cmd->add_option("--out-a", revise.out_a, "first output path")->required();
  revise_cmd->add_option("--out-b", revise.out_b, "second output path")->required();
  revise_cmd->add_option("--report", revise.report, "key=value report output path")->required();

  // retrieve-hands
  RetrieveArgs retrieve;
  CLI::App* retrieve_cmd = app.add_subcommand("retrieve-hands", "find the best hand clip for a query");
  retrieve_cmd->fallthrough();
  retrieve_cmd->add_option("--index", retrieve.index, "embedding index file")->required();
  retrieve_cmd->add_option("--query-vec", retrieve.query_vec, "query vector file")->required();
  retrieve_cmd->add_option("--target-len", retrieve.target_len, "frames to fit the clip to");
  retrieve_cmd->add_option("--out", retrieve.out, "fitted clip output path");
  retrieve_cmd->add_option("--clips-dir", retrieve.clips_dir,
                           "directory of <id>.hands clips (default: alongside the index)");

  // plot generate | extract | revise | distribute
  PlotArgs plot;
  CLI::App* plot_cmd = app.add_subcommand("plot", "script generation and rewriting");
  plot_cmd->require_subcommand(1);
  plot_cmd->fallthrough();

  CLI::App* plot_gen_cmd = plot_cmd->add_subcommand("generate", "write a plot for a scene");
  plot_gen_cmd->fallthrough();
  plot_gen_cmd->add_option("--catalog", plot.catalog, "scene object catalog")->required();
  plot_gen_cmd->add_option("--prompts", plot.prompts, "prompt template directory");
  plot_gen_cmd->add_option("--out", plot.out, "also write the plot here");

  CLI::App* plot_ext_cmd = plot_cmd->add_subcommand("extract", "turn a plot into order lists");
  plot_ext_cmd->fallthrough();
  plot_ext_cmd->add_option("--plot", plot.plot_file, "plot text file")->required();
  plot_ext_cmd->add_option("--prompts", plot.prompts, "prompt template directory");
  plot_ext_cmd->add_option("--out", plot.out, "also write the orders here");

  CLI::App* plot_rev_cmd = plot_cmd->add_subcommand("revise", "synchronize and validate order lists");
  plot_rev_cmd->fallthrough();
  plot_rev_cmd->add_option("--orders", plot.orders_file, "two-character order file")->required();
  plot_rev_cmd->add_option("--catalog", plot.catalog, "scene object catalog")->required();
  plot_rev_cmd->add_option("--prompts", plot.prompts, "prompt template directory");
  plot_rev_cmd->add_option("--out", plot.out, "also write the script here");

  CLI::App* plot_dist_cmd = plot_cmd->add_subcommand("distribute", "split a script into module queues");
  plot_dist_cmd->fallthrough();
  plot_dist_cmd->add_option("--orders", plot.orders_file, "order file")->required();
  plot_dist_cmd->add_option("--out", plot.out, "also write the queues here");

  // pipeline
  std::string pipeline_out;
  CLI::App* pipeline_cmd = app.add_subcommand("pipeline", "run every stage end to end");
  pipeline_cmd->fallthrough();
  pipeline_cmd->add_option("--out", pipeline_out, "output directory (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return run_scene_synth(synth, seed);
    if (metrics_cmd->parsed()) return run_metrics(metrics);
    if (blend_cmd->parsed()) return run_sync_blend(sync_blend);
    if (align_cmd->parsed()) return run_sync_align(sync_align);
    if (revise_cmd->parsed()) return run_revise(revise);
    if (retrieve_cmd->parsed()) return run_retrieve(retrieve, seed);
    if (plot_gen_cmd->parsed()) return run_plot_generate(plot, mock);
    if (plot_ext_cmd->parsed()) return run_plot_extract(plot, mock);
    if (plot_rev_cmd->parsed()) return run_plot_revise(plot, mock);
    if (plot_dist_cmd->parsed()) return run_plot_distribute(plot);

    if (pipeline_cmd->parsed()) {
      if (config_path.empty()) {
        std::cerr << "error: pipeline needs --config\n";
        return 2;
      }
      mkit::PipelineConfig cfg = mkit::load_pipeline_config(config_path);
      if (!pipeline_out.empty()) cfg.out_dir = pipeline_out;
      if (app.count("--seed") > 0) cfg.seed = seed;
      if (mock) cfg.mock = true;
      const mkit::PipelineResult res = mkit::run_pipeline(cfg);
      std::cout << "stages=" << res.stages_completed << " out=" << res.out_dir << "\n";
      std::cout << mkit::write_metrics_text(res.metrics);
      return 0;
    }
  } catch (const mkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
