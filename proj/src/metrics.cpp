#include "mkit/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace mkit {
namespace {

void check_feet(const MotionSequence& seq, const ContactParams& cp) {
  if (seq.frames.empty()) throw Error(Errc::EmptyInput, "metric needs at least one frame");
  const int cols = static_cast<int>(seq.frames.front().markers.cols());
  for (int m : cp.foot_markers) {
    if (m < 0 || m >= cols) {
      throw Error(Errc::IndexOutOfRange, "foot marker " + std::to_string(m) + " outside marker set");
    }
  }
}

}  // namespace

double foot_skate(const MotionSequence& seq, const ContactParams& cp) {
  if (seq.length() < 2) throw Error(Errc::TooShort, "foot skate needs at least two frames");
  check_feet(seq, cp);

  double total = 0.0;
  int count = 0;
  for (int i = 0; i + 1 < seq.length(); ++i) {
    const auto& cur = seq.frames[i].markers;
    const auto& nxt = seq.frames[i + 1].markers;
    for (int m : cp.foot_markers) {
      if (cur(2, m) - cp.ground_z > cp.height_eps) continue;  // airborne, no contact
      const double dx = nxt(0, m) - cur(0, m);
      const double dy = nxt(1, m) - cur(1, m);
      total += std::hypot(dx, dy) * seq.fps;
      ++count;
    }
  }
  return count > 0 ? total / count : 0.0;
}

double floor_penetration(const MotionSequence& seq, const ContactParams& cp) {
  check_feet(seq, cp);
  double total = 0.0;
  for (const auto& f : seq.frames) {
    for (int m : cp.foot_markers) {
      total += std::max(0.0, cp.ground_z - f.markers(2, m));
    }
  }
  return total / (static_cast<double>(seq.length()) * cp.foot_markers.size());
}

ScenePenetration scene_penetration(const MotionSequence& seq, const SdfGrid& grid) {
  if (seq.frames.empty()) throw Error(Errc::EmptyInput, "metric needs at least one frame");
  ScenePenetration out;
  out.per_frame.reserve(seq.frames.size());
  double indicator_total = 0.0;
  for (const auto& f : seq.frames) {
    double depth = 0.0;
    int inside = 0;
    for (int m = 0; m < f.markers.cols(); ++m) {
      const double s = sample_sdf(grid, f.markers.col(m), SampleMode::Clamp);
      if (s < 0.0) {
        depth += -s;
        ++inside;
      }
    }
    out.per_frame.push_back(depth);
    out.depth += depth;
    indicator_total += inside;
  }
  out.depth /= static_cast<double>(seq.length());
  out.indicator = indicator_total / static_cast<double>(seq.length());
  return out;
}

TriMesh marker_hull_mesh(const MarkerFrame& f) { return convex_hull_3d(f.markers); }

namespace {

double mutual_fraction(const TriMesh& mesh_a, const TriMesh& mesh_b, double threshold) {
  const auto [a_in_b, b_in_a] = mesh_intersection_count(mesh_a, mesh_b, threshold);
  const double denom = mesh_a.vertex_count() + mesh_b.vertex_count();
  return denom > 0.0 ? (a_in_b + b_in_a) / denom : 0.0;
}

}  // namespace

MutualPenetration human_penetration(const MotionSequence& a, const MotionSequence& b,
                                    const MeshBuilder& builder, double threshold) {
  if (a.length() != b.length()) {
    throw Error(Errc::LengthMismatch, "mutual penetration needs equal-length sequences");
  }
  if (a.frames.empty()) throw Error(Errc::EmptyInput, "metric needs at least one frame");

  MutualPenetration out;
  out.per_frame.reserve(a.frames.size());
  for (int i = 0; i < a.length(); ++i) {
    const double frac = mutual_fraction(builder(a.frames[i]), builder(b.frames[i]), threshold);
    out.per_frame.push_back(frac);
    out.mean += frac;
  }
  out.mean /= static_cast<double>(a.length());
  return out;
}

MutualPenetration human_penetration(const std::vector<TriMesh>& a, const std::vector<TriMesh>& b,
                                    double threshold) {
  if (a.size() != b.size()) {
    throw Error(Errc::LengthMismatch, "mutual penetration needs equal-length mesh lists");
  }
  if (a.empty()) throw Error(Errc::EmptyInput, "metric needs at least one frame");

  MutualPenetration out;
  out.per_frame.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double frac = mutual_fraction(a[i], b[i], threshold);
    out.per_frame.push_back(frac);
    out.mean += frac;
  }
  out.mean /= static_cast<double>(a.size());
  return out;
}

double scene_reg(const Eigen::Matrix3Xd& x, const Eigen::Matrix3Xd& x_ref) {
  if (x.cols() != x_ref.cols()) {
    throw Error(Errc::MarkerMismatch, "marker sets differ in size");
  }
  const int n = static_cast<int>(x.cols());
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const double d = (x.col(j) - x.col(k)).lpNorm<1>();
      const double d_ref = (x_ref.col(j) - x_ref.col(k)).lpNorm<1>();
      total += std::abs(d - d_ref);
    }
  }
  return total;
}

double human_reg(const Eigen::Matrix3Xd& x, const Eigen::Matrix3Xd& x_ref) {
  if (x.cols() != x_ref.cols()) {
    throw Error(Errc::MarkerMismatch, "marker sets differ in size");
  }
  double total = 0.0;
  for (int j = 0; j < x.cols(); ++j) {
    total += (x.col(j) - x_ref.col(j)).norm();
  }
  return total;
}

MetricsReport compute_metrics(const MotionSequence& a, const MotionSequence& b, const SdfGrid& grid,
                              const ContactParams& cp, const MeshBuilder& builder) {
  MetricsReport r;
  r.fs_a = foot_skate(a, cp);
  r.fs_b = foot_skate(b, cp);
  r.fp_a = floor_penetration(a, cp);
  r.fp_b = floor_penetration(b, cp);
  const ScenePenetration sa = scene_penetration(a, grid);
  const ScenePenetration sb = scene_penetration(b, grid);
  r.hsp_a = sa.depth;
  r.hsp_b = sb.depth;
  r.hsp_indicator_a = sa.indicator;
  r.hsp_indicator_b = sb.indicator;
  r.hhp = human_penetration(a, b, builder).mean;
  return r;
}

std::string write_metrics_text(const MetricsReport& report) {
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  std::string text;
  text += "fs_a=" + fmt(report.fs_a) + "\nfs_b=" + fmt(report.fs_b) + "\n";
  text += "fp_a=" + fmt(report.fp_a) + "\nfp_b=" + fmt(report.fp_b) + "\n";
  text += "hsp_a=" + fmt(report.hsp_a) + "\nhsp_b=" + fmt(report.hsp_b) + "\n";
  text += "hsp_indicator_a=" + fmt(report.hsp_indicator_a) + "\nhsp_indicator_b=" +
          fmt(report.hsp_indicator_b) + "\n";
  text += "hhp=" + fmt(report.hhp) + "\n";
  return text;
}

}  // namespace mkit
