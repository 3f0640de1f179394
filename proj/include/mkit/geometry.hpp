#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mkit/error.hpp"

namespace mkit {

/// Convex polygon in the plane. Vertices run counter-clockwise starting at
/// the lexicographically smallest point. Collinear or coincident inputs
/// produce a degenerate hull of one or two vertices.
struct Hull2D {
  std::vector<Eigen::Vector2d> vertices;
  bool degenerate = false;
};

Hull2D convex_hull_2d(const std::vector<Eigen::Vector2d>& points);

/// Inclusive containment test; points on the boundary count as inside.
bool point_in_hull(const Hull2D& hull, const Eigen::Vector2d& p);

/// Planar obstacle footprint: an axis pair (a, b) around a center, rotated
/// by yaw. Rectangles span [-a, a] x [-b, b] in the local frame; ellipses
/// use the same extents as semi-axes.
struct ObstaclePattern {
  enum class Kind { Rectangle, Ellipse };
  Kind kind = Kind::Rectangle;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double a = 1.0;
  double b = 1.0;
  double yaw = 0.0;
};

bool point_in_pattern(const ObstaclePattern& pat, const Eigen::Vector2d& p);

/// Indexed triangle mesh; triangles store column indices into vertices.
struct TriMesh {
  Eigen::Matrix3Xd vertices;
  Eigen::Matrix3Xi triangles;

  int vertex_count() const { return static_cast<int>(vertices.cols()); }
  int triangle_count() const { return static_cast<int>(triangles.cols()); }
};

/// Generalized winding number of the mesh around p (solid angle sum over
/// 4*pi). Approximately 1 inside a closed mesh, 0 outside. If on_surface is
/// given it is set when p lies on (or within ~1e-9 of) a triangle, where the
/// value itself is ill-conditioned.
double winding_number(const TriMesh& mesh, const Eigen::Vector3d& p, bool* on_surface = nullptr);

/// Count how many of A's vertices fall inside B and vice versa, using the
/// winding-number test with the given inside threshold.
std::pair<int, int> mesh_intersection_count(const TriMesh& a, const TriMesh& b, double threshold = 0.5);

/// Convex hull of a 3-D point cloud as a closed, outward-oriented triangle
/// mesh. Throws BadParams when the points are coplanar or fewer than four.
TriMesh convex_hull_3d(const Eigen::Matrix3Xd& points);

// --- mesh text round-trip ("v x y z" / "f i j k", 1-based indices) ---------

std::string write_mesh_text(const TriMesh& mesh);
TriMesh read_mesh_text(const std::string& text);

void save_mesh(const TriMesh& mesh, const std::string& path);
TriMesh load_mesh(const std::string& path);

}  // namespace mkit
