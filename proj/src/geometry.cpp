#include "mkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mkit {
namespace {

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool lex_less(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

constexpr double kOnSegmentEps = 1e-12;

bool on_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  const Eigen::Vector2d ab = b - a;
  const Eigen::Vector2d ap = p - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm() <= kOnSegmentEps;
  const double cross = ab.x() * ap.y() - ab.y() * ap.x();
  if (std::abs(cross) > kOnSegmentEps * std::sqrt(len2)) return false;
  const double t = ap.dot(ab) / len2;
  return t >= -kOnSegmentEps && t <= 1.0 + kOnSegmentEps;
}

// Distance from p to the triangle (v0, v1, v2); used to flag near-surface
// query points where the winding number is unreliable.
double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& v0,
                               const Eigen::Vector3d& v1, const Eigen::Vector3d& v2) {
  const Eigen::Vector3d e0 = v1 - v0;
  const Eigen::Vector3d e1 = v2 - v0;
  const Eigen::Vector3d d = v0 - p;

  const double a = e0.dot(e0), b = e0.dot(e1), c = e1.dot(e1);
  const double d0 = e0.dot(d), d1 = e1.dot(d);
  const double det = a * c - b * b;
  double s = b * d1 - c * d0;
  double t = b * d0 - a * d1;

  if (s + t <= det) {
    if (s < 0.0) {
      if (t < 0.0) {
        if (d0 < 0.0) {
          t = 0.0;
          s = std::clamp(-d0 / a, 0.0, 1.0);
        } else {
          s = 0.0;
          t = (c > 0.0) ? std::clamp(-d1 / c, 0.0, 1.0) : 0.0;
        }
      } else {
        s = 0.0;
        t = (c > 0.0) ? std::clamp(-d1 / c, 0.0, 1.0) : 0.0;
      }
    } else if (t < 0.0) {
      t = 0.0;
      s = (a > 0.0) ? std::clamp(-d0 / a, 0.0, 1.0) : 0.0;
    } else if (det > 0.0) {
      s /= det;
      t /= det;
    } else {
      s = 0.0;
      t = 0.0;
    }
  } else {
    if (s < 0.0) {
      const double tmp0 = b + d0;
      const double tmp1 = c + d1;
      if (tmp1 > tmp0) {
        const double numer = tmp1 - tmp0;
        const double denom = a - 2.0 * b + c;
        s = (denom > 0.0) ? std::clamp(numer / denom, 0.0, 1.0) : 0.0;
        t = 1.0 - s;
      } else {
        s = 0.0;
        t = (c > 0.0) ? std::clamp(-d1 / c, 0.0, 1.0) : 0.0;
      }
    } else if (t < 0.0) {
      const double tmp0 = b + d1;
      const double tmp1 = a + d0;
      if (tmp1 > tmp0) {
        const double numer = tmp1 - tmp0;
        const double denom = a - 2.0 * b + c;
        t = (denom > 0.0) ? std::clamp(numer / denom, 0.0, 1.0) : 0.0;
        s = 1.0 - t;
      } else {
        t = 0.0;
        s = (a > 0.0) ? std::clamp(-d0 / a, 0.0, 1.0) : 0.0;
      }
    } else {
      const double numer = (c + d1) - (b + d0);
      const double denom = a - 2.0 * b + c;
      s = (denom > 0.0) ? std::clamp(numer / denom, 0.0, 1.0) : 0.0;
      t = 1.0 - s;
    }
  }
  return (v0 + s * e0 + t * e1 - p).norm();
}

}  // namespace

Hull2D convex_hull_2d(const std::vector<Eigen::Vector2d>& points) {
  Hull2D hull;
  if (points.empty()) {
    hull.degenerate = true;
    return hull;
  }

  std::vector<Eigen::Vector2d> pts = points;
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());

  const int n = static_cast<int>(pts.size());
  if (n <= 2) {
    hull.vertices = pts;
    hull.degenerate = true;
    return hull;
  }

  // Monotone chain; strict turns only, so collinear interior points drop out.
  std::vector<Eigen::Vector2d> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  const int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);

  if (h.size() <= 2) {
    // All input points collinear.
    hull.vertices = {pts.front(), pts.back()};
    hull.degenerate = true;
    return hull;
  }

  // The chain is already counter-clockwise; rotate so the lexicographic
  // minimum leads (it normally does, but keep the invariant explicit).
  auto min_it = std::min_element(h.begin(), h.end(), lex_less);
  std::rotate(h.begin(), min_it, h.end());
  hull.vertices = std::move(h);
  return hull;
}

bool point_in_hull(const Hull2D& hull, const Eigen::Vector2d& p) {
  const auto& v = hull.vertices;
  if (v.empty()) return false;
  if (v.size() == 1) return (p - v[0]).norm() <= kOnSegmentEps;
  if (v.size() == 2) return on_segment(v[0], v[1], p);

  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::Vector2d& a = v[i];
    const Eigen::Vector2d& b = v[(i + 1) % v.size()];
    if (cross2(a, b, p) < -kOnSegmentEps) return false;
  }
  return true;
}

bool point_in_pattern(const ObstaclePattern& pat, const Eigen::Vector2d& p) {
  const double c = std::cos(-pat.yaw), s = std::sin(-pat.yaw);
  const Eigen::Vector2d d = p - pat.center;
  const double u = c * d.x() - s * d.y();
  const double v = s * d.x() + c * d.y();
  if (pat.kind == ObstaclePattern::Kind::Rectangle) {
    return std::abs(u) <= pat.a && std::abs(v) <= pat.b;
  }
  const double ru = u / pat.a;
  const double rv = v / pat.b;
  return ru * ru + rv * rv <= 1.0;
}

double winding_number(const TriMesh& mesh, const Eigen::Vector3d& p, bool* on_surface) {
  if (on_surface) *on_surface = false;
  double total = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Vector3d v0 = mesh.vertices.col(mesh.triangles(0, t));
    const Eigen::Vector3d v1 = mesh.vertices.col(mesh.triangles(1, t));
    const Eigen::Vector3d v2 = mesh.vertices.col(mesh.triangles(2, t));

    if (on_surface && !*on_surface && point_triangle_distance(p, v0, v1, v2) <= 1e-9) {
      *on_surface = true;
    }

    const Eigen::Vector3d a = v0 - p;
    const Eigen::Vector3d b = v1 - p;
    const Eigen::Vector3d c = v2 - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double det = a.dot(b.cross(c));
    const double denom = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(det, denom);
  }
  return total / (4.0 * M_PI);
}

std::pair<int, int> mesh_intersection_count(const TriMesh& a, const TriMesh& b, double threshold) {
  int a_in_b = 0;
  for (int i = 0; i < a.vertex_count(); ++i) {
    if (std::abs(winding_number(b, a.vertices.col(i))) > threshold) ++a_in_b;
  }
  int b_in_a = 0;
  for (int i = 0; i < b.vertex_count(); ++i) {
    if (std::abs(winding_number(a, b.vertices.col(i))) > threshold) ++b_in_a;
  }
  return {a_in_b, b_in_a};
}

namespace {

struct HullFace {
  int v[3];
  Eigen::Vector3d normal;
  double offset;  // plane: normal.dot(x) = offset
  bool alive = true;
};

}  // namespace

TriMesh convex_hull_3d(const Eigen::Matrix3Xd& points) {
  const int n = static_cast<int>(points.cols());
  if (n < 4) throw Error(Errc::BadParams, "3-D hull needs at least four points");

  const double scale = std::max(1.0, points.cwiseAbs().maxCoeff());
  const double eps = 1e-10 * scale;

  // Seed tetrahedron: two extreme points along x, the point farthest from
  // that line, then the point farthest from the resulting plane.
  int i0 = 0, i1 = 0;
  for (int i = 1; i < n; ++i) {
    if (points(0, i) < points(0, i0)) i0 = i;
    if (points(0, i) > points(0, i1)) i1 = i;
  }
  if (i0 == i1) i1 = (i0 + 1) % n;
  if ((points.col(i1) - points.col(i0)).norm() <= eps) {
    throw Error(Errc::BadParams, "3-D hull input is degenerate");
  }

  int i2 = -1;
  double best = eps;
  const Eigen::Vector3d d01 = points.col(i1) - points.col(i0);
  for (int i = 0; i < n; ++i) {
    const double dist = d01.cross(points.col(i) - points.col(i0)).norm() / d01.norm();
    if (dist > best) {
      best = dist;
      i2 = i;
    }
  }
  if (i2 < 0) throw Error(Errc::BadParams, "3-D hull input is collinear");

  Eigen::Vector3d plane_n = d01.cross(points.col(i2) - points.col(i0)).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const double dist = std::abs(plane_n.dot(points.col(i) - points.col(i0)));
    if (dist > best) {
      best = dist;
      i3 = i;
    }
  }
  if (i3 < 0) throw Error(Errc::BadParams, "3-D hull input is coplanar");

  std::vector<HullFace> faces;
  const Eigen::Vector3d centroid =
      (points.col(i0) + points.col(i1) + points.col(i2) + points.col(i3)) / 4.0;

  auto make_face = [&](int a, int b, int c) {
    HullFace f;
    f.v[0] = a;
    f.v[1] = b;
    f.v[2] = c;
    f.normal = (points.col(b) - points.col(a)).cross(points.col(c) - points.col(a));
    const double len = f.normal.norm();
    if (len > 0.0) f.normal /= len;
    f.offset = f.normal.dot(points.col(a));
    if (f.normal.dot(centroid) > f.offset) {
      // Flip so the normal points away from the hull interior.
      std::swap(f.v[1], f.v[2]);
      f.normal = -f.normal;
      f.offset = -f.offset;
    }
    faces.push_back(f);
  };
  make_face(i0, i1, i2);
  make_face(i0, i1, i3);
  make_face(i0, i2, i3);
  make_face(i1, i2, i3);

  // Incremental insertion: for each point outside some face, remove every
  // visible face and fan new faces around the horizon loop.
  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    const Eigen::Vector3d x = points.col(p);

    std::vector<int> visible;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].normal.dot(x) - faces[f].offset > eps) {
        visible.push_back(static_cast<int>(f));
      }
    }
    if (visible.empty()) continue;

    // Horizon edges are those bounding exactly one visible face. Count
    // directed edges; an edge of the visible region whose reverse is absent
    // borders a hidden face.
    std::set<std::pair<int, int>> edges;
    for (int f : visible) {
      for (int e = 0; e < 3; ++e) {
        const int a = faces[f].v[e];
        const int b = faces[f].v[(e + 1) % 3];
        if (edges.count({b, a})) {
          edges.erase({b, a});
        } else {
          edges.insert({a, b});
        }
      }
      faces[f].alive = false;
    }
    for (const auto& [a, b] : edges) make_face(a, b, p);
  }

  std::vector<const HullFace*> alive;
  for (const auto& f : faces) {
    if (f.alive) alive.push_back(&f);
  }

  // Compact vertex set to those actually used.
  std::vector<int> remap(n, -1);
  std::vector<int> used;
  for (const auto* f : alive) {
    for (int v : f->v) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(used.size());
        used.push_back(v);
      }
    }
  }

  TriMesh mesh;
  mesh.vertices.resize(3, static_cast<int>(used.size()));
  for (std::size_t i = 0; i < used.size(); ++i) mesh.vertices.col(static_cast<int>(i)) = points.col(used[i]);
  mesh.triangles.resize(3, static_cast<int>(alive.size()));
  for (std::size_t f = 0; f < alive.size(); ++f) {
    for (int e = 0; e < 3; ++e) mesh.triangles(e, static_cast<int>(f)) = remap[alive[f]->v[e]];
  }
  return mesh;
}

std::string write_mesh_text(const TriMesh& mesh) {
  std::string out;
  char buf[128];
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", mesh.vertices(0, i), mesh.vertices(1, i),
                  mesh.vertices(2, i));
    out += buf;
  }
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    std::snprintf(buf, sizeof(buf), "f %d %d %d\n", mesh.triangles(0, t) + 1, mesh.triangles(1, t) + 1,
                  mesh.triangles(2, t) + 1);
    out += buf;
  }
  return out;
}

TriMesh read_mesh_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Eigen::Vector3d> verts;
  std::vector<Eigen::Vector3i> tris;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string tag;
    row >> tag;
    if (tag == "v") {
      Eigen::Vector3d p;
      if (!(row >> p.x() >> p.y() >> p.z())) {
        throw Error(Errc::ParseError, "bad vertex at line " + std::to_string(line_no));
      }
      verts.push_back(p);
    } else if (tag == "f") {
      Eigen::Vector3i t;
      if (!(row >> t.x() >> t.y() >> t.z())) {
        throw Error(Errc::ParseError, "bad face at line " + std::to_string(line_no));
      }
      t.array() -= 1;
      if ((t.array() < 0).any()) {
        throw Error(Errc::ParseError, "face index below 1 at line " + std::to_string(line_no));
      }
      tris.push_back(t);
    } else {
      throw Error(Errc::ParseError, "unknown tag '" + tag + "' at line " + std::to_string(line_no));
    }
  }

  TriMesh mesh;
  mesh.vertices.resize(3, static_cast<int>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.col(static_cast<int>(i)) = verts[i];
  mesh.triangles.resize(3, static_cast<int>(tris.size()));
  for (std::size_t i = 0; i < tris.size(); ++i) {
    if ((tris[i].array() >= static_cast<int>(verts.size())).any()) {
      throw Error(Errc::ParseError, "face references missing vertex");
    }
    mesh.triangles.col(static_cast<int>(i)) = tris[i];
  }
  return mesh;
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  out << write_mesh_text(mesh);
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

TriMesh load_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_mesh_text(buf.str());
}

}  // namespace mkit
