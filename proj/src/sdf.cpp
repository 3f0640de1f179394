#include "mkit/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mkit/rng.hpp"

namespace mkit {
namespace {

SdfGrid make_grid(const SceneSynthParams& p) {
  SdfGrid g;
  g.dims = p.dims;
  g.bbox_min = p.center - Eigen::Vector3d(p.box_size.x() / 2.0, p.box_size.y() / 2.0, 0.0);
  g.bbox_max = p.center + Eigen::Vector3d(p.box_size.x() / 2.0, p.box_size.y() / 2.0, p.box_size.z());
  g.values.assign(static_cast<std::size_t>(g.node_count()), 1);
  return g;
}

void append_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& s, std::size_t start = 0) : data_(s), pos_(start) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(byte() | (byte() << 8)); }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }

  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(byte()) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  unsigned byte() {
    if (pos_ >= data_.size()) throw Error(Errc::ParseError, "truncated grid data");
    return static_cast<unsigned char>(data_[pos_++]);
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

void validate_params(const SceneSynthParams& p) {
  if ((p.box_size.array() <= 0.0).any()) throw Error(Errc::BadParams, "box_size must be positive");
  if ((p.dims.array() < 2).any()) throw Error(Errc::BadParams, "grid dims must be at least 2");
  if (!(p.t_floor >= 0.0)) throw Error(Errc::BadParams, "t_floor must be non-negative");
  if (!(p.t_floor < p.t_ceiling_low)) throw Error(Errc::BadParams, "t_floor must lie below the ceiling range");
  if (!(p.t_ceiling_low <= p.t_ceiling_high)) throw Error(Errc::BadParams, "ceiling range is inverted");
  if (!(p.t_ceiling_high <= p.box_size.z())) throw Error(Errc::BadParams, "ceiling range exceeds the box");
  if (p.k_min < 0 || p.k_max < p.k_min || p.k_max > 64) throw Error(Errc::BadParams, "pattern count range invalid");
  if (!(p.extent_min > 0.0) || p.extent_max < p.extent_min) throw Error(Errc::BadParams, "pattern extent range invalid");
}

Hull2D walkable_hull(const std::vector<const MotionSequence*>& seqs) {
  std::vector<Eigen::Vector2d> pts;
  for (const MotionSequence* seq : seqs) {
    if (!seq) continue;
    for (const auto& f : seq->frames) {
      for (int k = 0; k < f.markers.cols(); ++k) {
        pts.emplace_back(f.markers(0, k), f.markers(1, k));
      }
    }
  }
  return convex_hull_2d(pts);
}

Hull2D walkable_hull(const std::vector<TriMesh>& meshes) {
  std::vector<Eigen::Vector2d> pts;
  for (const TriMesh& mesh : meshes) {
    for (int k = 0; k < mesh.vertices.cols(); ++k) {
      pts.emplace_back(mesh.vertices(0, k), mesh.vertices(1, k));
    }
  }
  return convex_hull_2d(pts);
}

SdfGrid rasterize_patterns(const SceneSynthParams& p, const Hull2D& walkable, double t_ceiling,
                           const std::vector<PlacedPattern>& patterns) {
  validate_params(p);
  SdfGrid g = make_grid(p);
  const double floor_z = p.center.z();
  for (int i = 0; i < g.dims.x(); ++i) {
    for (int j = 0; j < g.dims.y(); ++j) {
      const Eigen::Vector3d base = g.node_position(i, j, 0);
      const Eigen::Vector2d xy = base.head<2>();
      const bool in_hull = point_in_hull(walkable, xy);

      double obstacle_top = -1.0;
      if (!in_hull) {
        for (const auto& placed : patterns) {
          if (point_in_pattern(placed.pattern, xy)) {
            obstacle_top = std::max(obstacle_top, placed.height);
          }
        }
      }

      for (int k = 0; k < g.dims.z(); ++k) {
        const double h = g.node_position(i, j, k).z() - floor_z;
        const bool solid = h <= p.t_floor || h >= t_ceiling || h < obstacle_top;
        g.values[static_cast<std::size_t>(g.index(i, j, k))] = solid ? -1 : 1;
      }
    }
  }
  return g;
}

SdfGrid rasterize_columns(const SceneSynthParams& p, const Hull2D& walkable, double t_ceiling,
                          const std::function<double(double, double)>& column_height) {
  validate_params(p);
  SdfGrid g = make_grid(p);
  const double floor_z = p.center.z();
  for (int i = 0; i < g.dims.x(); ++i) {
    for (int j = 0; j < g.dims.y(); ++j) {
      const Eigen::Vector3d base = g.node_position(i, j, 0);
      const Eigen::Vector2d xy = base.head<2>();
      const bool in_hull = point_in_hull(walkable, xy);
      const double terrain = in_hull ? p.t_floor : column_height(xy.x(), xy.y());

      for (int k = 0; k < g.dims.z(); ++k) {
        const double h = g.node_position(i, j, k).z() - floor_z;
        const bool solid = h <= p.t_floor || h >= t_ceiling || h < terrain;
        g.values[static_cast<std::size_t>(g.index(i, j, k))] = solid ? -1 : 1;
      }
    }
  }
  return g;
}

SceneSynthResult synth_scene_planes(const SceneSynthParams& p, const Hull2D& walkable) {
  validate_params(p);
  Rng rng(p.seed);
  SceneSynthResult res;
  res.t_ceiling = rng.uniform(p.t_ceiling_low, p.t_ceiling_high);
  const int k = rng.uniform_int(p.k_min, p.k_max);
  res.patterns.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    PlacedPattern placed;
    placed.pattern.kind = (rng.uniform_int(0, 1) == 0) ? ObstaclePattern::Kind::Rectangle
                                                       : ObstaclePattern::Kind::Ellipse;
    placed.pattern.center.x() = rng.uniform(p.center.x() - p.box_size.x() / 2.0, p.center.x() + p.box_size.x() / 2.0);
    placed.pattern.center.y() = rng.uniform(p.center.y() - p.box_size.y() / 2.0, p.center.y() + p.box_size.y() / 2.0);
    placed.pattern.a = rng.uniform(p.extent_min, p.extent_max);
    placed.pattern.b = rng.uniform(p.extent_min, p.extent_max);
    placed.pattern.yaw = rng.uniform(0.0, M_PI);
    placed.height = rng.uniform(p.t_floor, res.t_ceiling);
    res.patterns.push_back(placed);
  }
  res.grid = rasterize_patterns(p, walkable, res.t_ceiling, res.patterns);
  return res;
}

SceneSynthResult synth_scene_points(const SceneSynthParams& p, const Hull2D& walkable) {
  validate_params(p);
  Rng rng(p.seed);
  SceneSynthResult res;
  res.t_ceiling = rng.uniform(p.t_ceiling_low, p.t_ceiling_high);
  const double t_ceiling = res.t_ceiling;
  res.grid = rasterize_columns(p, walkable, t_ceiling, [&](double, double) {
    return rng.uniform(p.t_floor, t_ceiling);
  });
  return res;
}

double sample_sdf(const SdfGrid& grid, const Eigen::Vector3d& p, SampleMode mode) {
  if ((grid.dims.array() < 2).any() ||
      grid.values.size() != static_cast<std::size_t>(grid.node_count())) {
    throw Error(Errc::BadParams, "grid is not initialized");
  }

  Eigen::Vector3d q = p;
  for (int d = 0; d < 3; ++d) {
    if (q(d) < grid.bbox_min(d) || q(d) > grid.bbox_max(d)) {
      if (mode == SampleMode::Error) {
        throw Error(Errc::OutOfBounds, "sample point outside grid box");
      }
      q(d) = std::clamp(q(d), grid.bbox_min(d), grid.bbox_max(d));
    }
  }

  const Eigen::Vector3d s = grid.spacing();
  Eigen::Vector3i i0;
  Eigen::Vector3d u;
  for (int d = 0; d < 3; ++d) {
    const double t = (q(d) - grid.bbox_min(d)) / s(d);
    int cell = static_cast<int>(std::floor(t));
    cell = std::clamp(cell, 0, grid.dims(d) - 2);
    i0(d) = cell;
    u(d) = t - cell;
  }

  double acc = 0.0;
  for (int di = 0; di < 2; ++di) {
    const double wx = di ? u.x() : 1.0 - u.x();
    for (int dj = 0; dj < 2; ++dj) {
      const double wy = dj ? u.y() : 1.0 - u.y();
      for (int dk = 0; dk < 2; ++dk) {
        const double wz = dk ? u.z() : 1.0 - u.z();
        const double v = grid.values[static_cast<std::size_t>(grid.index(i0.x() + di, i0.y() + dj, i0.z() + dk))];
        acc += wx * wy * wz * v;
      }
    }
  }
  return acc;
}

Eigen::Matrix4Xd condition_points(const SdfGrid& grid, const Eigen::Vector3d& anchor) {
  Eigen::Matrix4Xd out(4, grid.node_count());
  int col = 0;
  for (int i = 0; i < grid.dims.x(); ++i) {
    for (int j = 0; j < grid.dims.y(); ++j) {
      for (int k = 0; k < grid.dims.z(); ++k) {
        out.col(col).head<3>() = grid.node_position(i, j, k) - anchor;
        out(3, col) = grid.values[static_cast<std::size_t>(grid.index(i, j, k))];
        ++col;
      }
    }
  }
  return out;
}

std::string write_grid_bytes(const SdfGrid& grid) {
  if (grid.values.size() != static_cast<std::size_t>(grid.node_count())) {
    throw Error(Errc::BadParams, "grid value count does not match dims");
  }
  std::string out;
  out += "SDFG";
  append_u16(out, 1);
  for (int d = 0; d < 3; ++d) append_u32(out, static_cast<std::uint32_t>(grid.dims(d)));
  for (int d = 0; d < 3; ++d) append_f64(out, grid.bbox_min(d));
  for (int d = 0; d < 3; ++d) append_f64(out, grid.bbox_max(d));

  // Values bit-packed LSB-first: bit 1 encodes free (+1), bit 0 solid (-1).
  unsigned byte = 0;
  int nbits = 0;
  for (std::int8_t v : grid.values) {
    if (v == 1) byte |= 1u << nbits;
    if (++nbits == 8) {
      out.push_back(static_cast<char>(byte));
      byte = 0;
      nbits = 0;
    }
  }
  if (nbits > 0) out.push_back(static_cast<char>(byte));
  return out;
}

SdfGrid read_grid_bytes(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "SDFG") != 0) {
    throw Error(Errc::ParseError, "missing SDFG magic");
  }
  ByteReader r(bytes, 4);
  const std::uint16_t version = r.u16();
  if (version != 1) throw Error(Errc::ParseError, "unsupported grid version " + std::to_string(version));

  SdfGrid g;
  for (int d = 0; d < 3; ++d) g.dims(d) = static_cast<int>(r.u32());
  if ((g.dims.array() < 2).any()) throw Error(Errc::ParseError, "grid dims must be at least 2");
  for (int d = 0; d < 3; ++d) g.bbox_min(d) = r.f64();
  for (int d = 0; d < 3; ++d) g.bbox_max(d) = r.f64();

  const int n = g.node_count();
  g.values.resize(static_cast<std::size_t>(n));
  const std::size_t payload = static_cast<std::size_t>((n + 7) / 8);
  if (r.remaining() < payload) throw Error(Errc::ParseError, "grid payload truncated");
  std::size_t bit = 0;
  unsigned current = 0;
  for (int idx = 0; idx < n; ++idx) {
    if (bit == 0) current = r.byte();
    g.values[static_cast<std::size_t>(idx)] = (current >> bit) & 1u ? 1 : -1;
    bit = (bit + 1) % 8;
  }
  return g;
}

void save_grid(const SdfGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  const std::string bytes = write_grid_bytes(grid);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

SdfGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_grid_bytes(buf.str());
}

}  // namespace mkit
