#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mkit/error.hpp"
#include "mkit/rng.hpp"

namespace mkit {

enum class CommandKind { Locomotion, SceneInteraction, Hhi, Invalid };
enum class MotionType { Sit, Lie };
enum class InvalidReason { Malformed, UnknownMotionType };

/// One queue command for one character.
struct Command {
  CommandKind kind = CommandKind::Locomotion;
  std::optional<std::string> target;      // locomotion destination; empty = wander
  std::optional<std::string> object;      // scene-interaction object
  std::optional<MotionType> motion;       // scene-interaction motion
  std::string hhi_text;                   // interaction description
  InvalidReason invalid_reason = InvalidReason::Malformed;
  std::string raw;                        // original token text
};

/// Parsed order lists, one per character.
struct CommandScript {
  std::vector<std::string> characters;
  std::vector<std::vector<Command>> commands;
};

std::string command_to_string(const Command& cmd);
std::string write_script(const CommandScript& script);

/// Parse order text. Multi-character form uses one "Orders <label>: [...]"
/// line per character; a bare "[...]" is a single unnamed character. Tokens
/// are split at top-level commas: "None" is idle locomotion, a bare word a
/// locomotion target, "[object, motion]" a scene interaction, "HHI: text"
/// a two-person interaction. Structural problems (unbalanced brackets,
/// missing list) throw GrammarError with line and column; merely
/// questionable tokens parse as Invalid commands for the revision pass.
CommandScript parse_commands(const std::string& text);

struct RevisionWarning {
  int character = 0;
  int index = 0;
  std::string message;
};

struct RevisedScript {
  CommandScript script;
  std::vector<RevisionWarning> warnings;
};

/// Enforce executability against the scene's object names: malformed tokens
/// fall back to idle locomotion, interactions with unknown motions are
/// dropped, commands aimed at unknown objects become idle locomotion, and
/// (for two characters) trailing unpaired "HHI:" commands are removed. Every
/// change is reported; running the result through again changes nothing.
RevisedScript validate_and_revise(const CommandScript& script, const std::vector<std::string>& known_objects);

struct QueueItem {
  int seq = 0;  // position in the character's original command list
  Command command;
};

/// The k-th shared interaction: each character's queue position and text.
struct HhiItem {
  std::vector<int> seq;
  std::vector<std::string> text;
};

struct DistributedQueues {
  std::vector<std::string> characters;
  std::vector<std::vector<QueueItem>> locomotion;
  std::vector<std::vector<QueueItem>> scene_interaction;
  std::vector<HhiItem> shared;
};

/// Split a script into per-character locomotion and scene-interaction
/// queues plus a shared interaction list. merge_queues is the exact
/// inverse. Throws HhiCountMismatch when characters disagree on the number
/// of shared interactions.
DistributedQueues distribute(const CommandScript& script);
CommandScript merge_queues(const DistributedQueues& queues);

/// Line-per-item rendering of distributed queues (locomotion and scene
/// entries per character, then the shared interaction list).
std::string write_queues_text(const DistributedQueues& queues);

// --- scene description -------------------------------------------------------

struct CatalogObject {
  std::string name;
  Eigen::Vector3d bmin = Eigen::Vector3d::Zero();
  Eigen::Vector3d bmax = Eigen::Vector3d::Zero();
};

struct SceneCatalog {
  std::vector<CatalogObject> objects;
  std::vector<std::string> names() const;
};

/// One object per line: name minx miny minz maxx maxy maxz
SceneCatalog load_catalog(const std::string& path);

/// Walkability raster. Cell (x, y) spans resolution metres; row 0 starts at
/// origin and rows grow with world y. 1 means walkable.
struct NavGrid {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();  // lower-left corner
  double resolution = 0.1;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> walkable;  // row-major, row 0 first

  bool cell(int x, int y) const { return walkable[static_cast<std::size_t>(y) * width + x] != 0; }
  Eigen::Vector2d cell_center(int x, int y) const {
    return origin + Eigen::Vector2d((x + 0.5) * resolution, (y + 0.5) * resolution);
  }
  bool contains(const Eigen::Vector2d& p) const {
    const Eigen::Vector2d local = p - origin;
    return local.x() >= 0.0 && local.y() >= 0.0 && local.x() < width * resolution &&
           local.y() < height * resolution;
  }
  bool walkable_at(const Eigen::Vector2d& p) const {
    if (!contains(p)) return false;
    const int x = static_cast<int>((p.x() - origin.x()) / resolution);
    const int y = static_cast<int>((p.y() - origin.y()) / resolution);
    return cell(std::min(x, width - 1), std::min(y, height - 1));
  }
};

/// Bitmap (P1) raster plus a "<path>.meta" sidecar holding origin_x,
/// origin_y and resolution as key=value lines. Rows are stored bottom-up.
NavGrid load_navgrid(const std::string& path);
void save_navgrid(const NavGrid& grid, const std::string& path);

/// Pick a walkable route point. Without a target the point is a uniformly
/// random walkable cell center. With a target object, points are drawn from
/// the object's footprint grown by a 0.5 m margin; the margin inflates 1.5x
/// after every 8 rejections, and 64 failed draws raise Unreachable.
Eigen::Vector2d sample_route_point(const SceneCatalog& catalog, const NavGrid& grid,
                                   const std::optional<std::string>& target, Rng& rng);

}  // namespace mkit
