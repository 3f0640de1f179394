#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mkit/error.hpp"
#include "mkit/geometry.hpp"
#include "mkit/motion.hpp"

namespace mkit {

/// Binary occupancy grid over an axis-aligned box. Values are +1 (free) or
/// -1 (solid) at the grid nodes; node (i, j, k) sits at
/// bbox_min + (i, j, k) * spacing with spacing = (bbox_max - bbox_min) /
/// (dims - 1). Storage is x-major: index = (i * dims.y + j) * dims.z + k.
struct SdfGrid {
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  Eigen::Vector3d bbox_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d bbox_max = Eigen::Vector3d::Zero();
  std::vector<std::int8_t> values;

  int node_count() const { return dims.x() * dims.y() * dims.z(); }
  int index(int i, int j, int k) const { return (i * dims.y() + j) * dims.z() + k; }
  Eigen::Vector3d spacing() const {
    return (bbox_max - bbox_min).cwiseQuotient((dims - Eigen::Vector3i::Ones()).cast<double>());
  }
  Eigen::Vector3d node_position(int i, int j, int k) const {
    return bbox_min + Eigen::Vector3d(i, j, k).cwiseProduct(spacing());
  }
};

/// Scene synthesis controls. The box spans box_size around center with its
/// floor at center.z; heights are measured from that floor.
struct SceneSynthParams {
  Eigen::Vector3d box_size = Eigen::Vector3d(3.0, 3.0, 3.0);
  Eigen::Vector3i dims = Eigen::Vector3i(128, 128, 128);
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double t_floor = 0.05;          // everything at or below is solid
  double t_ceiling_low = 2.0;     // ceiling height drawn from this range
  double t_ceiling_high = 2.8;
  int k_min = 0;                  // obstacle pattern count range
  int k_max = 10;
  double extent_min = 0.2;        // pattern semi-extent range
  double extent_max = 0.8;
  std::uint64_t seed = 0;
};

void validate_params(const SceneSynthParams& p);

/// An obstacle footprint with the height its solid column reaches.
struct PlacedPattern {
  ObstaclePattern pattern;
  double height = 0.0;
};

struct SceneSynthResult {
  SdfGrid grid;
  double t_ceiling = 0.0;
  std::vector<PlacedPattern> patterns;  // empty for the per-column variant
};

/// Convex hull of the horizontal marker footprint across every frame of the
/// given sequences; scene synthesis keeps these columns free.
Hull2D walkable_hull(const std::vector<const MotionSequence*>& seqs);

/// Same footprint taken from explicit per-frame body meshes.
Hull2D walkable_hull(const std::vector<TriMesh>& meshes);

/// Rasterize floor, ceiling and obstacle patterns into a grid: nodes are
/// solid below t_floor (inclusive), at or above t_ceiling, and above the
/// floor up to (exclusive) the tallest covering pattern -- except inside the
/// walkable hull, which stays free between the planes.
SdfGrid rasterize_patterns(const SceneSynthParams& p, const Hull2D& walkable, double t_ceiling,
                           const std::vector<PlacedPattern>& patterns);

/// Rasterize with a per-column terrain height: each column outside the
/// walkable hull is solid below column_height(x, y); hull columns stay free
/// between the planes. column_height is called once per non-hull column in
/// x-major order, which pins the draw sequence when it wraps an RNG.
SdfGrid rasterize_columns(const SceneSynthParams& p, const Hull2D& walkable, double t_ceiling,
                          const std::function<double(double, double)>& column_height);

/// Obstacle-pattern scene: draws a ceiling height, a pattern count K, then K
/// random rectangle/ellipse footprints with their own heights.
SceneSynthResult synth_scene_planes(const SceneSynthParams& p, const Hull2D& walkable);

/// Per-column scene: draws a ceiling height, then an independent terrain
/// height for every column outside the walkable hull.
SceneSynthResult synth_scene_points(const SceneSynthParams& p, const Hull2D& walkable);

enum class SampleMode { Clamp, Error };

/// Trilinear interpolation of the grid values at p. Clamp mode projects p
/// onto the box first; Error mode throws OutOfBounds instead.
double sample_sdf(const SdfGrid& grid, const Eigen::Vector3d& p, SampleMode mode = SampleMode::Clamp);

/// All grid nodes as (position - anchor, value) rows of a 4 x N matrix, in
/// storage order.
Eigen::Matrix4Xd condition_points(const SdfGrid& grid, const Eigen::Vector3d& anchor);

// --- binary round-trip ------------------------------------------------------

std::string write_grid_bytes(const SdfGrid& grid);
SdfGrid read_grid_bytes(const std::string& bytes);

void save_grid(const SdfGrid& grid, const std::string& path);
SdfGrid load_grid(const std::string& path);

}  // namespace mkit
