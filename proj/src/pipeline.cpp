#include "mkit/pipeline.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "mkit/commands.hpp"
#include "mkit/llm.hpp"
#include "mkit/motion.hpp"
#include "mkit/retrieval.hpp"
#include "mkit/rng.hpp"
#include "mkit/sdf.hpp"
#include "mkit/sync.hpp"

namespace mkit {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw Error(Errc::ParseError, "bad boolean for '" + key + "'");
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Bracketed order list of one character, e.g. "[None, sofa, HHI: hug]".
std::string order_list_string(const CommandScript& script, std::size_t character) {
  std::string out = "[";
  const auto& commands = script.commands[character];
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (i > 0) out += ", ";
    out += command_to_string(commands[i]);
  }
  return out + "]";
}

Eigen::VectorXd load_query_vector(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  if (vals.empty()) throw Error(Errc::ParseError, "query vector file holds no values");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size()));
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  std::istringstream in(read_file(path));
  PipelineConfig cfg;
  std::string line;
  int no = 0;
  bool seed_set = false;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::ParseError, "config line " + std::to_string(no) + " is not key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "catalog") cfg.catalog = value;
      else if (key == "navgrid") cfg.navgrid = value;
      else if (key == "prompts_dir") cfg.prompts_dir = value;
      else if (key == "grid") cfg.grid = value;
      else if (key == "motion_a") cfg.motion_a = value;
      else if (key == "motion_b") cfg.motion_b = value;
      else if (key == "hhi_a") cfg.hhi_a = value;
      else if (key == "hhi_b") cfg.hhi_b = value;
      else if (key == "plot_file") cfg.plot_file = value;
      else if (key == "orders_file") cfg.orders_file = value;
      else if (key == "index") cfg.index = value;
      else if (key == "query_vec") cfg.query_vec = value;
      else if (key == "clips_dir") cfg.clips_dir = value;
      else if (key == "out_dir") cfg.out_dir = value;
      else if (key == "mock") cfg.mock = parse_bool(value, key);
      else if (key == "seed") { cfg.seed = std::stoull(value); seed_set = true; }
      else if (key == "buffer_frames") cfg.buffer_frames = std::stoi(value);
      else if (key == "clip_seconds") cfg.clip_seconds = std::stod(value);
      else if (key == "fps") cfg.fps = std::stoi(value);
      else if (key == "hhp_threshold") cfg.hhp_threshold = std::stod(value);
      else if (key == "max_iterations") cfg.max_iterations = std::stoi(value);
      else if (key == "sdf_dims") cfg.sdf_dims = std::stoi(value);
      else if (key == "sdf_box") cfg.sdf_box = std::stod(value);
      else if (key == "sdf_t_floor") cfg.sdf_t_floor = std::stod(value);
      else if (key == "sdf_ceiling_low") cfg.sdf_ceiling_low = std::stod(value);
      else if (key == "sdf_ceiling_high") cfg.sdf_ceiling_high = std::stod(value);
      else if (key == "sdf_k_min") cfg.sdf_k_min = std::stoi(value);
      else if (key == "sdf_k_max") cfg.sdf_k_max = std::stoi(value);
      else if (key == "sdf_extent_min") cfg.sdf_extent_min = std::stod(value);
      else if (key == "sdf_extent_max") cfg.sdf_extent_max = std::stod(value);
      else throw Error(Errc::BadParams, "unknown config key '" + key + "'");
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bad value for '" + key + "' on line " + std::to_string(no));
    }
  }
  if (!seed_set) {
    throw Error(Errc::BadParams, "config must set an explicit seed");
  }

  // Every referenced path must exist up front; a missing artifact should
  // surface here, not from the middle of a run.
  namespace fs = std::filesystem;
  const std::pair<const char*, const std::string*> files[] = {
      {"catalog", &cfg.catalog},   {"navgrid", &cfg.navgrid},     {"grid", &cfg.grid},
      {"motion_a", &cfg.motion_a}, {"motion_b", &cfg.motion_b},   {"hhi_a", &cfg.hhi_a},
      {"hhi_b", &cfg.hhi_b},       {"plot_file", &cfg.plot_file}, {"orders_file", &cfg.orders_file},
      {"index", &cfg.index},       {"query_vec", &cfg.query_vec}};
  for (const auto& [key, value] : files) {
    if (!value->empty() && !fs::exists(*value)) {
      throw Error(Errc::BadParams, std::string(key) + " file does not exist: " + *value);
    }
  }
  const std::pair<const char*, const std::string*> dirs[] = {{"prompts_dir", &cfg.prompts_dir},
                                                             {"clips_dir", &cfg.clips_dir}};
  for (const auto& [key, value] : dirs) {
    if (!value->empty() && !fs::is_directory(*value)) {
      throw Error(Errc::BadParams, std::string(key) + " is not a directory: " + *value);
    }
  }
  return cfg;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.catalog.empty() || cfg.navgrid.empty()) {
    throw Error(Errc::BadParams, "config must set catalog and navgrid");
  }
  if (cfg.motion_a.empty() || cfg.motion_b.empty()) {
    throw Error(Errc::BadParams, "config must set motion_a and motion_b");
  }

  fs::create_directories(cfg.out_dir);
  auto out_path = [&](const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); };

  PipelineResult result;
  result.out_dir = cfg.out_dir;
  Rng rng(cfg.seed);

  std::ofstream llm_log(out_path("llm_log.txt"), std::ios::binary);

  std::unique_ptr<LlmClient> client;
  auto get_client = [&]() -> LlmClient& {
    if (!client) {
      if (cfg.mock) {
        client = std::make_unique<MockLlmClient>();
      } else {
        client = std::make_unique<HttpLlmClient>();
      }
    }
    return *client;
  };

  PromptTemplates templates;
  bool templates_loaded = false;
  auto get_templates = [&]() -> const PromptTemplates& {
    if (!templates_loaded) {
      if (cfg.prompts_dir.empty()) {
        throw Error(Errc::BadParams, "config must set prompts_dir for client stages");
      }
      templates = load_templates(cfg.prompts_dir);
      templates_loaded = true;
    }
    return templates;
  };

  auto stage = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      throw Error(e.code(), name + " failed: " + e.what());
    } catch (const std::exception& e) {
      throw Error(Errc::IoError, name + " failed: " + e.what());
    }
    ++result.stages_completed;
  };

  // Shared state threaded through the stages.
  SceneCatalog catalog;
  NavGrid navgrid;
  MotionSequence motion_a, motion_b;
  std::string plot, orders_raw, orders_revised;
  CommandScript script;
  DistributedQueues queues;
  MotionSequence synced_a, synced_b, blended_a, blended_b, hands_a, hands_b;
  RevisionResult revision;
  SdfGrid scene_grid;

  stage("00_inputs", [&] {
    catalog = load_catalog(cfg.catalog);
    navgrid = load_navgrid(cfg.navgrid);
    motion_a = load_motion(cfg.motion_a);
    motion_b = load_motion(cfg.motion_b);
    if (motion_a.fps != motion_b.fps) {
      throw Error(Errc::FpsMismatch, "input motions run at different frame rates");
    }
  });

  stage("01_plot", [&] {
    plot = cfg.plot_file.empty()
               ? generate_plot(get_client(), get_templates(), catalog.names(), &llm_log)
               : read_file(cfg.plot_file);
    write_file(out_path("01_plot.txt"), plot + (plot.empty() || plot.back() == '\n' ? "" : "\n"));
  });

  stage("02_orders_raw", [&] {
    orders_raw = cfg.orders_file.empty()
                     ? extract_orders(get_client(), get_templates(), plot, &llm_log)
                     : read_file(cfg.orders_file);
    write_file(out_path("02_orders_raw.txt"), orders_raw);
  });

  stage("03_orders_revised", [&] {
    const CommandScript raw_script = parse_commands(orders_raw);
    if (raw_script.characters.size() != 2) {
      throw Error(Errc::BadParams, "pipeline expects exactly two characters");
    }
    orders_revised = revise_orders(get_client(), get_templates(), order_list_string(raw_script, 0),
                                   order_list_string(raw_script, 1), &llm_log);
    write_file(out_path("03_orders_revised.txt"), orders_revised);
  });

  stage("04_script", [&] {
    const CommandScript parsed = parse_commands(orders_revised);
    const RevisedScript revised = validate_and_revise(parsed, catalog.names());
    script = revised.script;
    write_file(out_path("04_script.txt"), write_script(script));
    std::string warnings;
    for (const auto& w : revised.warnings) {
      warnings += "char=" + script.characters[static_cast<std::size_t>(w.character)] +
                  " index=" + std::to_string(w.index) + " " + w.message + "\n";
    }
    write_file(out_path("04_warnings.txt"), warnings);
  });

  stage("05_queues", [&] {
    queues = distribute(script);
    write_file(out_path("05_queues.txt"), write_queues_text(queues));
  });

  stage("06_route_points", [&] {
    std::string text;
    for (std::size_t c = 0; c < queues.characters.size(); ++c) {
      for (const auto& item : queues.locomotion[c]) {
        const Eigen::Vector2d p = sample_route_point(catalog, navgrid, item.command.target, rng);
        text += "char=" + queues.characters[c] + " seq=" + std::to_string(item.seq) + " target=" +
                (item.command.target ? *item.command.target : "None") + " x=" + fmt(p.x()) +
                " y=" + fmt(p.y()) + "\n";
      }
    }
    write_file(out_path("06_route_points.txt"), text);
  });

  stage("07_alignment", [&] {
    std::vector<std::string> orders_a, orders_b;
    for (const auto& cmd : script.commands[0]) orders_a.push_back(command_to_string(cmd));
    for (const auto& cmd : script.commands[1]) orders_b.push_back(command_to_string(cmd));
    const auto segments_a = segment_orders(orders_a);
    const auto segments_b = segment_orders(orders_b);
    const auto alignment = align_segment_lengths(segments_a, segments_b, cfg.clip_seconds, cfg.fps);
    std::string text;
    for (std::size_t k = 0; k < alignment.size(); ++k) {
      text += "segment=" + std::to_string(k) + " target_frames=" +
              std::to_string(alignment[k].target_frames) + " pad_a=" + std::to_string(alignment[k].pad_a) +
              " pad_b=" + std::to_string(alignment[k].pad_b) + "\n";
    }
    write_file(out_path("07_alignment.txt"), text);
  });

  stage("08_sync", [&] {
    const int target = std::max(motion_a.length(), motion_b.length());
    synced_a = pad_with_hover(motion_a, target - motion_a.length(), rng);
    synced_b = pad_with_hover(motion_b, target - motion_b.length(), rng);
    save_motion(synced_a, out_path("08_synced_a.motion"));
    save_motion(synced_b, out_path("08_synced_b.motion"));
  });

  stage("09_blend", [&] {
    blended_a = cfg.hhi_a.empty() ? synced_a
                                  : blend_junction(synced_a, load_motion(cfg.hhi_a), cfg.buffer_frames);
    blended_b = cfg.hhi_b.empty() ? synced_b
                                  : blend_junction(synced_b, load_motion(cfg.hhi_b), cfg.buffer_frames);
    // Interaction clips may differ in length; settle both characters on a
    // common frame count again.
    const int target = std::max(blended_a.length(), blended_b.length());
    blended_a = pad_with_hover(blended_a, target - blended_a.length(), rng);
    blended_b = pad_with_hover(blended_b, target - blended_b.length(), rng);
    save_motion(blended_a, out_path("09_blended_a.motion"));
    save_motion(blended_b, out_path("09_blended_b.motion"));
  });

  stage("10_hands", [&] {
    hands_a = blended_a;
    hands_b = blended_b;
    const bool retrieval_ready = !cfg.index.empty() && !cfg.query_vec.empty() && !cfg.clips_dir.empty();
    if (retrieval_ready) {
      const EmbeddingIndex index = load_index(cfg.index);
      const Eigen::VectorXd query = load_query_vector(cfg.query_vec);
      const RetrievalResult hit = index.retrieve(query);
      const std::vector<HandPose> clip =
          load_hand_clip((fs::path(cfg.clips_dir) / (hit.id + ".hands")).string());
      const HandPose ambient(kHandJointCount, Eigen::Quaterniond::Identity());
      hands_a = splice_hands(blended_a, fit_clip_length(clip, blended_a.length(), rng), ambient,
                             cfg.buffer_frames);
      hands_b = splice_hands(blended_b, fit_clip_length(clip, blended_b.length(), rng), ambient,
                             cfg.buffer_frames);
      write_file(out_path("10_retrieval.txt"),
                 "clip=" + hit.id + " similarity=" + fmt(hit.similarity) + "\n");
    }
    save_motion(hands_a, out_path("10_hands_a.motion"));
    save_motion(hands_b, out_path("10_hands_b.motion"));
  });

  stage("11_revise", [&] {
    revision = revise_collisions(hands_a, hands_b, cfg.hhp_threshold, cfg.max_iterations);
    result.revision = revision.report;
    save_motion(revision.a, out_path("11_revised_a.motion"));
    save_motion(revision.b, out_path("11_revised_b.motion"));
    write_file(out_path("11_revision_report.txt"), write_revision_report_text(revision.report));
  });

  stage("12_scene", [&] {
    if (!cfg.grid.empty()) {
      scene_grid = load_grid(cfg.grid);
    } else {
      SceneSynthParams params;
      params.box_size.setConstant(cfg.sdf_box);
      params.dims.setConstant(cfg.sdf_dims);
      params.center = Eigen::Vector3d(revision.a.frames.front().pelvis.x(),
                                      revision.a.frames.front().pelvis.y(), 0.0);
      params.t_floor = cfg.sdf_t_floor;
      params.t_ceiling_low = cfg.sdf_ceiling_low;
      params.t_ceiling_high = cfg.sdf_ceiling_high;
      params.k_min = cfg.sdf_k_min;
      params.k_max = cfg.sdf_k_max;
      params.extent_min = cfg.sdf_extent_min;
      params.extent_max = cfg.sdf_extent_max;
      params.seed = cfg.seed;
      const Hull2D hull =
          walkable_hull(std::vector<const MotionSequence*>{&revision.a, &revision.b});
      scene_grid = synth_scene_planes(params, hull).grid;
    }
    save_grid(scene_grid, out_path("12_scene.grid"));
  });

  stage("13_metrics", [&] {
    result.metrics = compute_metrics(revision.a, revision.b, scene_grid);
    write_file(out_path("13_metrics.txt"), write_metrics_text(result.metrics));
  });

  return result;
}

}  // namespace mkit
