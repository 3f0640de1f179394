#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "mkit/geometry.hpp"
#include "mkit/rng.hpp"

using namespace mkit;
using testutil::box_mesh;

namespace {

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Signed-angle-sum membership oracle for a convex CCW polygon: the turning
/// angle around an interior point sums to 2*pi, around an exterior one to 0.
bool inside_by_angle_sum(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d u = poly[i] - p;
    const Eigen::Vector2d v = poly[(i + 1) % poly.size()] - p;
    total += std::atan2(u.x() * v.y() - u.y() * v.x(), u.dot(v));
  }
  return std::abs(total) > M_PI;  // 2*pi inside vs 0 outside
}

/// Independent solid-angle oracle: per-triangle spherical excess via
/// l'Huilier's theorem, signed by the orientation determinant.
double winding_by_spherical_excess(const TriMesh& mesh, const Eigen::Vector3d& p) {
  double total = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Vector3d a = (mesh.vertices.col(mesh.triangles(0, t)) - p).normalized();
    const Eigen::Vector3d b = (mesh.vertices.col(mesh.triangles(1, t)) - p).normalized();
    const Eigen::Vector3d c = (mesh.vertices.col(mesh.triangles(2, t)) - p).normalized();

    auto arc = [](const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
      return std::atan2(u.cross(v).norm(), u.dot(v));
    };
    const double sa = arc(b, c), sb = arc(a, c), sc = arc(a, b);
    const double s = 0.5 * (sa + sb + sc);
    const double prod = std::tan(0.5 * s) * std::tan(0.5 * (s - sa)) * std::tan(0.5 * (s - sb)) *
                        std::tan(0.5 * (s - sc));
    const double excess = 4.0 * std::atan(std::sqrt(std::max(0.0, prod)));
    total += (a.dot(b.cross(c)) >= 0.0 ? excess : -excess);
  }
  return total / (4.0 * M_PI);
}

/// Moller-Trumbore ray/triangle hit with a strictness report: *clean is
/// cleared when the hit parameters sit too close to an edge or the origin,
/// where parity counting is unreliable.
bool ray_hits_triangle(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                       const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                       const Eigen::Vector3d& v2, bool* clean) {
  constexpr double kEps = 1e-10;
  const Eigen::Vector3d e1 = v1 - v0;
  const Eigen::Vector3d e2 = v2 - v0;
  const Eigen::Vector3d h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < kEps) {
    *clean = false;
    return false;
  }
  const double inv = 1.0 / det;
  const Eigen::Vector3d s = origin - v0;
  const double u = inv * s.dot(h);
  const Eigen::Vector3d q = s.cross(e1);
  const double v = inv * dir.dot(q);
  const double t = inv * e2.dot(q);
  if (u < -kEps || u > 1.0 + kEps || v < -kEps || u + v > 1.0 + kEps || t < -kEps) {
    if (std::abs(u) < 1e-6 || std::abs(v) < 1e-6 || std::abs(1.0 - u - v) < 1e-6 ||
        std::abs(t) < 1e-6) {
      *clean = false;  // grazing miss; retry with another direction
    }
    return false;
  }
  if (u < 1e-6 || v < 1e-6 || 1.0 - u - v < 1e-6 || t < 1e-6) *clean = false;
  return t > 0.0;
}

/// Parity-of-crossings membership oracle; retries directions until one
/// passes every triangle cleanly.
bool inside_by_ray_parity(const TriMesh& mesh, const Eigen::Vector3d& p, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::Vector3d dir(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
    if (dir.norm() < 1e-6) continue;
    dir.normalize();
    bool clean = true;
    int hits = 0;
    for (int t = 0; t < mesh.triangle_count() && clean; ++t) {
      if (ray_hits_triangle(p, dir, mesh.vertices.col(mesh.triangles(0, t)),
                            mesh.vertices.col(mesh.triangles(1, t)),
                            mesh.vertices.col(mesh.triangles(2, t)), &clean)) {
        ++hits;
      }
    }
    if (clean) return (hits % 2) == 1;
  }
  FAIL("no clean ray direction found");
  return false;
}

double min_surface_distance(const TriMesh& mesh, const Eigen::Vector3d& p) {
  // Conservative proxy: distance to the nearest vertex bounds the true
  // surface distance from above; used only to discard risky query points.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    best = std::min(best, (mesh.vertices.col(i) - p).norm());
  }
  return best;
}

TriMesh random_hull(Rng& rng, int points, double scale) {
  Eigen::Matrix3Xd pts(3, points);
  for (int i = 0; i < points; ++i) {
    pts.col(i) = scale * Eigen::Vector3d(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0),
                                         rng.normal(0.0, 1.0));
  }
  return convex_hull_3d(pts);
}

}  // namespace

TEST_CASE("2-D hull of a noisy square keeps exactly the corners") {
  std::vector<Eigen::Vector2d> pts = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    pts.emplace_back(rng.uniform(0.1, 1.9), rng.uniform(0.1, 1.9));
  }
  const Hull2D hull = convex_hull_2d(pts);
  REQUIRE(hull.vertices.size() == 4);
  CHECK_FALSE(hull.degenerate);
  // Counter-clockwise from the lexicographic minimum.
  CHECK(hull.vertices[0] == Eigen::Vector2d(0, 0));
  CHECK(hull.vertices[1] == Eigen::Vector2d(2, 0));
  CHECK(hull.vertices[2] == Eigen::Vector2d(2, 2));
  CHECK(hull.vertices[3] == Eigen::Vector2d(0, 2));
}

TEST_CASE("2-D hull properties on random input") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::Vector2d> pts;
    const int n = rng.uniform_int(3, 40);
    for (int i = 0; i < n; ++i) pts.emplace_back(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const Hull2D hull = convex_hull_2d(pts);

    // Every input point is inside (or on) the hull.
    for (const auto& p : pts) CHECK(point_in_hull(hull, p));

    if (!hull.degenerate) {
      // Strictly convex counter-clockwise chain.
      const auto& v = hull.vertices;
      for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(cross2(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]) > 0.0);
      }
      // Idempotent.
      const Hull2D again = convex_hull_2d(hull.vertices);
      REQUIRE(again.vertices.size() == hull.vertices.size());
      for (std::size_t i = 0; i < v.size(); ++i) CHECK(again.vertices[i] == v[i]);
    }
  }
}

TEST_CASE("degenerate hulls are flagged") {
  CHECK(convex_hull_2d({}).degenerate);
  CHECK(convex_hull_2d({{1, 1}}).degenerate);
  CHECK(convex_hull_2d({{1, 1}, {1, 1}}).vertices.size() == 1);

  const Hull2D segment = convex_hull_2d({{0, 0}, {1, 1}, {2, 2}, {0.5, 0.5}});
  CHECK(segment.degenerate);
  REQUIRE(segment.vertices.size() == 2);
  CHECK(point_in_hull(segment, {1.5, 1.5}));
  CHECK_FALSE(point_in_hull(segment, {1.5, 1.6}));
  CHECK_FALSE(point_in_hull(segment, {3, 3}));
}

TEST_CASE("point_in_hull agrees with the angle-sum oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 25; ++i) pts.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Hull2D hull = convex_hull_2d(pts);
    REQUIRE_FALSE(hull.degenerate);

    for (int q = 0; q < 200; ++q) {
      const Eigen::Vector2d p(rng.uniform(-3, 3), rng.uniform(-3, 3));
      // Skip queries hugging the boundary, where the oracles may disagree
      // over ties; boundary semantics get their own checks.
      bool near_edge = false;
      const auto& v = hull.vertices;
      for (std::size_t i = 0; i < v.size() && !near_edge; ++i) {
        const Eigen::Vector2d a = v[i], b = v[(i + 1) % v.size()];
        const double len = (b - a).norm();
        if (std::abs(cross2(a, b, p)) / len < 1e-9) near_edge = true;
      }
      if (near_edge) continue;
      CHECK(point_in_hull(hull, p) == inside_by_angle_sum(hull.vertices, p));
    }
  }
}

TEST_CASE("point_in_hull includes the boundary") {
  const Hull2D square = convex_hull_2d({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(point_in_hull(square, {0, 0}));
  CHECK(point_in_hull(square, {0.5, 0}));
  CHECK(point_in_hull(square, {1, 1}));
  CHECK(point_in_hull(square, {0.5, 0.5}));
  CHECK_FALSE(point_in_hull(square, {1.0 + 1e-9, 0.5}));
  CHECK_FALSE(point_in_hull(square, {-1e-9, -1e-9}));
}

TEST_CASE("rectangle pattern honors rotation and inclusive edges") {
  ObstaclePattern pat;
  pat.kind = ObstaclePattern::Kind::Rectangle;
  pat.center = {1.0, -0.5};
  pat.a = 1.0;
  pat.b = 0.5;
  pat.yaw = M_PI / 6.0;

  const Eigen::Matrix2d r = Eigen::Rotation2Dd(pat.yaw).toRotationMatrix();
  const Eigen::Vector2d corner_local(1.0, 0.5);

  // Nudged just inside / outside along the corner diagonal.
  const Eigen::Vector2d inside = pat.center + r * (corner_local * (1.0 - 1e-9));
  const Eigen::Vector2d outside = pat.center + r * (corner_local * (1.0 + 1e-6));
  CHECK(point_in_pattern(pat, inside));
  CHECK_FALSE(point_in_pattern(pat, outside));
  CHECK(point_in_pattern(pat, pat.center));

  // The unrotated corner lies outside once the footprint is rotated.
  CHECK_FALSE(point_in_pattern(pat, pat.center + corner_local));
}

TEST_CASE("ellipse pattern matches its quadratic form") {
  ObstaclePattern pat;
  pat.kind = ObstaclePattern::Kind::Ellipse;
  pat.center = {0.0, 0.0};
  pat.a = 2.0;
  pat.b = 1.0;
  pat.yaw = 0.25;

  Rng rng(31);
  const Eigen::Matrix2d r = Eigen::Rotation2Dd(pat.yaw).toRotationMatrix();
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector2d local(rng.uniform(-2.5, 2.5), rng.uniform(-1.5, 1.5));
    const double q = (local.x() / pat.a) * (local.x() / pat.a) +
                     (local.y() / pat.b) * (local.y() / pat.b);
    if (std::abs(q - 1.0) < 1e-9) continue;
    CHECK(point_in_pattern(pat, r * local) == (q <= 1.0));
  }
  // Semi-axis endpoints are on the boundary, hence inside.
  CHECK(point_in_pattern(pat, r * Eigen::Vector2d(2.0, 0.0)));
  CHECK(point_in_pattern(pat, r * Eigen::Vector2d(0.0, -1.0)));
}

TEST_CASE("winding number matches the spherical-excess oracle") {
  Rng rng(41);
  for (int trial = 0; trial < 8; ++trial) {
    const TriMesh mesh = random_hull(rng, rng.uniform_int(4, 24), 1.0);
    for (int q = 0; q < 60; ++q) {
      const Eigen::Vector3d p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
      if (min_surface_distance(mesh, p) < 1e-3) continue;
      const double got = winding_number(mesh, p);
      const double want = winding_by_spherical_excess(mesh, p);
      CHECK(std::abs(got - want) < 1e-9);
    }
  }
}

TEST_CASE("winding number is near 0 or 1 for closed meshes and agrees with ray parity") {
  Rng rng(43);
  for (int trial = 0; trial < 8; ++trial) {
    const TriMesh mesh = random_hull(rng, rng.uniform_int(4, 30), 1.0);
    for (int q = 0; q < 40; ++q) {
      const Eigen::Vector3d p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
      if (min_surface_distance(mesh, p) < 1e-2) continue;
      const double w = winding_number(mesh, p);
      const bool inside = inside_by_ray_parity(mesh, p, rng);
      CHECK(std::abs(w - (inside ? 1.0 : 0.0)) < 1e-3);
      CHECK((w > 0.5) == inside);
    }
  }
}

TEST_CASE("winding contribution is additive under triangle splits") {
  // Splitting one triangle at an edge midpoint must not change the summed
  // solid angle: the atan2 form telescopes.
  TriMesh single;
  single.vertices.resize(3, 3);
  single.vertices.col(0) = Eigen::Vector3d(0, 0, 1);
  single.vertices.col(1) = Eigen::Vector3d(2, 0, 1);
  single.vertices.col(2) = Eigen::Vector3d(0, 3, 1);
  single.triangles.resize(3, 1);
  single.triangles.col(0) = Eigen::Vector3i(0, 1, 2);

  TriMesh split;
  split.vertices.resize(3, 4);
  split.vertices.leftCols<3>() = single.vertices;
  split.vertices.col(3) = 0.5 * (single.vertices.col(0) + single.vertices.col(1));
  split.triangles.resize(3, 2);
  split.triangles.col(0) = Eigen::Vector3i(0, 3, 2);
  split.triangles.col(1) = Eigen::Vector3i(3, 1, 2);

  Rng rng(47);
  for (int q = 0; q < 100; ++q) {
    const Eigen::Vector3d p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-2, 0.5));
    CHECK(winding_number(single, p) ==
          doctest::Approx(winding_number(split, p)).epsilon(1e-12));
  }
}

TEST_CASE("winding number flags on-surface queries") {
  const TriMesh cube = box_mesh({0, 0, 0}, {1, 1, 1});
  bool on_surface = false;
  winding_number(cube, {1.0, 0.2, -0.3}, &on_surface);
  CHECK(on_surface);
  on_surface = true;
  winding_number(cube, {0.2, 0.1, 0.0}, &on_surface);
  CHECK_FALSE(on_surface);
}

TEST_CASE("winding number flips sign with orientation") {
  TriMesh cube = box_mesh({0, 0, 0}, {1, 1, 1});
  const Eigen::Vector3d p(0.1, -0.2, 0.3);
  const double w = winding_number(cube, p);
  CHECK(w == doctest::Approx(1.0).epsilon(1e-9));
  cube.triangles.row(1).swap(cube.triangles.row(2));
  CHECK(winding_number(cube, p) == doctest::Approx(-w).epsilon(1e-12));
}

TEST_CASE("mesh intersection counts nested and disjoint bodies") {
  const TriMesh inner = box_mesh({0, 0, 0}, {1, 1, 1});
  const TriMesh outer = box_mesh({0, 0, 0}, {1.1, 1.1, 1.1});
  CHECK(mesh_intersection_count(inner, outer) == std::make_pair(8, 0));
  CHECK(mesh_intersection_count(outer, inner) == std::make_pair(0, 8));

  const TriMesh far = box_mesh({5, 0, 0}, {1, 1, 1});
  CHECK(mesh_intersection_count(inner, far) == std::make_pair(0, 0));

  // A narrower box poking in from +x: its four -x vertices sit strictly
  // inside the original, while the original's corners stay outside it.
  const TriMesh poker = box_mesh({1.2, 0, 0}, {1, 0.8, 0.8});
  CHECK(mesh_intersection_count(inner, poker) == std::make_pair(0, 4));
  CHECK(mesh_intersection_count(poker, inner) == std::make_pair(4, 0));
}

TEST_CASE("3-D hull is closed, outward and contains its input") {
  Rng rng(53);
  for (int trial = 0; trial < 6; ++trial) {
    Eigen::Matrix3Xd pts(3, 30);
    for (int i = 0; i < 30; ++i) {
      pts.col(i) =
          Eigen::Vector3d(rng.normal(0.0, 1.0), rng.normal(1.0, 0.5), rng.normal(-2.0, 2.0));
    }
    const TriMesh hull = convex_hull_3d(pts);

    // Closed 2-manifold: every directed edge appears exactly once and its
    // reverse exactly once.
    std::set<std::pair<int, int>> directed;
    for (int t = 0; t < hull.triangle_count(); ++t) {
      for (int e = 0; e < 3; ++e) {
        const int a = hull.triangles(e, t);
        const int b = hull.triangles((e + 1) % 3, t);
        CHECK(directed.insert({a, b}).second);
      }
    }
    for (const auto& [a, b] : directed) CHECK(directed.count({b, a}) == 1);

    // Outward orientation: positive signed volume.
    double vol6 = 0.0;
    for (int t = 0; t < hull.triangle_count(); ++t) {
      vol6 += hull.vertices.col(hull.triangles(0, t))
                  .dot(hull.vertices.col(hull.triangles(1, t))
                           .cross(hull.vertices.col(hull.triangles(2, t))));
    }
    CHECK(vol6 > 0.0);

    // Every input point is enclosed (or on the surface).
    for (int i = 0; i < 30; ++i) {
      bool on_surface = false;
      const double w = winding_number(hull, pts.col(i), &on_surface);
      CHECK((on_surface || w > 0.5));
    }

    // Euler's relation for a triangulated convex polytope: F = 2V - 4.
    CHECK(hull.triangle_count() == 2 * hull.vertex_count() - 4);
  }
}

TEST_CASE("3-D hull of a cube with interior points keeps the corners") {
  Eigen::Matrix3Xd pts(3, 11);
  int c = 0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) pts.col(c++) = Eigen::Vector3d(dx, dy, dz);
    }
  }
  pts.col(8) = Eigen::Vector3d(0.5, 0.5, 0.5);
  pts.col(9) = Eigen::Vector3d(0.2, 0.7, 0.3);
  pts.col(10) = Eigen::Vector3d(0.9, 0.1, 0.8);
  const TriMesh hull = convex_hull_3d(pts);
  CHECK(hull.vertex_count() == 8);
  CHECK(hull.triangle_count() == 12);
}

TEST_CASE("3-D hull rejects degenerate input") {
  Eigen::Matrix3Xd three(3, 3);
  three.setRandom();
  CHECK_THROWS_AS(convex_hull_3d(three), Error);

  Eigen::Matrix3Xd coplanar(3, 8);
  Rng rng(59);
  for (int i = 0; i < 8; ++i) {
    coplanar.col(i) = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.25);
  }
  CHECK_THROWS_AS(convex_hull_3d(coplanar), Error);

  Eigen::Matrix3Xd collinear(3, 5);
  for (int i = 0; i < 5; ++i) collinear.col(i) = Eigen::Vector3d(i, 2.0 * i, -i);
  CHECK_THROWS_AS(convex_hull_3d(collinear), Error);
}

TEST_CASE("mesh text round-trip is exact and validates input") {
  Rng rng(61);
  const TriMesh mesh = random_hull(rng, 12, 2.0);
  const TriMesh back = read_mesh_text(write_mesh_text(mesh));
  CHECK(back.vertices == mesh.vertices);
  CHECK(back.triangles == mesh.triangles);

  CHECK_THROWS_AS(read_mesh_text("v 1 2\n"), Error);
  CHECK_THROWS_AS(read_mesh_text("x 1 2 3\n"), Error);
  CHECK_THROWS_AS(read_mesh_text("v 0 0 0\nf 1 2 3\n"), Error);  // missing vertices
  CHECK_THROWS_AS(read_mesh_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n"), Error);  // 1-based
}
