#include "mkit/motion.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mkit {
namespace {

// Per-coordinate linear blend of two unit quaternions, renormalized. Signs
// are aligned first so antipodal encodings of the same rotation cannot
// cancel. Rotation-aware interpolation lives with the blending utilities;
// this layer treats the channel as plain coordinates.
Eigen::Quaterniond lerp_quat(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double u) {
  Eigen::Vector4d cb = b.coeffs();
  if (a.coeffs().dot(cb) < 0.0) cb = -cb;
  Eigen::Quaterniond out;
  out.coeffs() = (1.0 - u) * a.coeffs() + u * cb;
  out.normalize();
  return out;
}

Eigen::Matrix2d rot2(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

void apply_planar(MotionSequence& seq, const Eigen::Matrix2d& r, const Eigen::Vector3d& origin) {
  for (auto& f : seq.frames) {
    for (int k = 0; k < f.markers.cols(); ++k) {
      Eigen::Vector3d p = f.markers.col(k) - origin;
      p.head<2>() = r * p.head<2>();
      f.markers.col(k) = p;
    }
    Eigen::Vector3d p = f.pelvis - origin;
    p.head<2>() = r * p.head<2>();
    f.pelvis = p;
  }
}

std::vector<Eigen::Vector3d> pelvis_track(const MotionSequence& seq) {
  std::vector<Eigen::Vector3d> track;
  track.reserve(seq.frames.size());
  for (const auto& f : seq.frames) track.push_back(f.pelvis);
  return track;
}

double parse_double(const std::string& tok) {
  const char* s = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || !std::isfinite(v)) {
    throw Error(Errc::ParseError, "bad numeric token '" + tok + "'");
  }
  return v;
}

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

CanonicalPair canonicalize_initial(const MotionSequence& a, const MotionSequence& b,
                                   const MarkerLayout& layout) {
  if (a.frames.empty() || b.frames.empty()) {
    throw Error(Errc::EmptyInput, "canonicalize_initial requires non-empty sequences");
  }
  const MarkerFrame& first = a.frames.front();
  if (layout.left_hip >= first.markers.cols() || layout.right_hip >= first.markers.cols() ||
      layout.left_hip < 0 || layout.right_hip < 0) {
    throw Error(Errc::IndexOutOfRange, "hip marker index outside marker set");
  }

  const Eigen::Vector3d origin = first.pelvis;
  const Eigen::Vector2d hips =
      (first.markers.col(layout.right_hip) - first.markers.col(layout.left_hip)).head<2>();

  // Facing direction: the across-hips vector rotated +90 degrees in plan view.
  double yaw = 0.0;
  if (hips.norm() > 1e-12) {
    const Eigen::Vector2d facing(-hips.y(), hips.x());
    yaw = M_PI / 2.0 - std::atan2(facing.y(), facing.x());
  }

  CanonicalPair pair;
  pair.a = a;
  pair.b = b;
  pair.mode = CanonicalMode::Initial;
  pair.pelvis_track_a = pelvis_track(a);
  pair.pelvis_track_b = pelvis_track(b);
  pair.frame0_yaw = yaw;
  pair.origin = origin;

  const Eigen::Matrix2d r = rot2(yaw);
  apply_planar(pair.a, r, origin);
  apply_planar(pair.b, r, origin);
  return pair;
}

CanonicalPair canonicalize_pelvis_local(const MotionSequence& a, const MotionSequence& b) {
  if (a.frames.empty() || b.frames.empty()) {
    throw Error(Errc::EmptyInput, "canonicalize_pelvis_local requires non-empty sequences");
  }
  CanonicalPair pair;
  pair.a = a;
  pair.b = b;
  pair.mode = CanonicalMode::PelvisLocal;
  pair.pelvis_track_a = pelvis_track(a);
  pair.pelvis_track_b = pelvis_track(b);

  auto localize = [](MotionSequence& seq) {
    for (auto& f : seq.frames) {
      f.markers.colwise() -= f.pelvis;
      f.pelvis.setZero();
    }
  };
  localize(pair.a);
  localize(pair.b);
  return pair;
}

std::pair<MotionSequence, MotionSequence> decanonicalize(const CanonicalPair& pair) {
  MotionSequence a = pair.a;
  MotionSequence b = pair.b;
  if (pair.pelvis_track_a.size() != pair.a.frames.size() ||
      pair.pelvis_track_b.size() != pair.b.frames.size()) {
    throw Error(Errc::LengthMismatch, "pelvis track length differs from frame count");
  }

  if (pair.mode == CanonicalMode::Initial) {
    const Eigen::Matrix2d r_inv = rot2(pair.frame0_yaw).transpose();
    auto restore = [&](MotionSequence& seq) {
      for (auto& f : seq.frames) {
        for (int k = 0; k < f.markers.cols(); ++k) {
          Eigen::Vector3d p = f.markers.col(k);
          p.head<2>() = r_inv * p.head<2>();
          f.markers.col(k) = p + pair.origin;
        }
        Eigen::Vector3d p = f.pelvis;
        p.head<2>() = r_inv * p.head<2>();
        f.pelvis = p + pair.origin;
      }
    };
    restore(a);
    restore(b);
  } else {
    auto restore = [](MotionSequence& seq, const std::vector<Eigen::Vector3d>& track) {
      for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        seq.frames[i].markers.colwise() += track[i];
        seq.frames[i].pelvis = track[i];
      }
    };
    restore(a, pair.pelvis_track_a);
    restore(b, pair.pelvis_track_b);
  }
  return {std::move(a), std::move(b)};
}

std::vector<Eigen::Vector3d> pelvis_velocities(const MotionSequence& seq) {
  const int n = seq.length();
  if (n < 2) throw Error(Errc::TooShort, "velocity needs at least two frames");
  std::vector<Eigen::Vector3d> v(n);
  for (int i = 0; i + 1 < n; ++i) {
    v[i] = (seq.frames[i + 1].pelvis - seq.frames[i].pelvis) * static_cast<double>(seq.fps);
  }
  v[n - 1] = v[n - 2];
  return v;
}

MotionSequence resample(const MotionSequence& seq, int new_len) {
  const int n = seq.length();
  if (new_len == n) return seq;
  if (new_len < 2) throw Error(Errc::BadLength, "resample target must be at least 2 frames");
  if (n < 2) throw Error(Errc::TooShort, "resample source must have at least 2 frames");

  MotionSequence out;
  out.fps = seq.fps;
  out.frames.resize(new_len);
  if (seq.has_hands()) out.hands.emplace(new_len);

  const int cols = static_cast<int>(seq.frames.front().markers.cols());
  for (int i = 0; i < new_len; ++i) {
    const double t = static_cast<double>(i) * (n - 1) / (new_len - 1);
    int i0 = static_cast<int>(std::floor(t));
    if (i0 > n - 2) i0 = n - 2;
    const double u = t - i0;

    const MarkerFrame& f0 = seq.frames[i0];
    const MarkerFrame& f1 = seq.frames[i0 + 1];
    MarkerFrame& dst = out.frames[i];
    dst.markers.resize(3, cols);
    dst.markers = (1.0 - u) * f0.markers + u * f1.markers;
    dst.pelvis = (1.0 - u) * f0.pelvis + u * f1.pelvis;

    if (seq.has_hands()) {
      const HandPose& h0 = (*seq.hands)[i0];
      const HandPose& h1 = (*seq.hands)[i0 + 1];
      HandPose& hd = (*out.hands)[i];
      hd.resize(h0.size());
      for (std::size_t j = 0; j < h0.size(); ++j) hd[j] = lerp_quat(h0[j], h1[j], u);
    }
  }
  return out;
}

Eigen::Matrix3Xd extract_markers(const Eigen::Matrix3Xd& vertices, const std::vector<int>& index_map) {
  Eigen::Matrix3Xd out(3, static_cast<int>(index_map.size()));
  for (std::size_t k = 0; k < index_map.size(); ++k) {
    const int idx = index_map[k];
    if (idx < 0 || idx >= vertices.cols()) {
      throw Error(Errc::IndexOutOfRange, "marker index " + std::to_string(idx) + " outside vertex set");
    }
    out.col(static_cast<int>(k)) = vertices.col(idx);
  }
  return out;
}

std::string write_motion_text(const MotionSequence& seq) {
  std::string out;
  out.reserve(seq.frames.size() * 204 * 20);
  out += "motion fps=" + std::to_string(seq.fps) + " frames=" + std::to_string(seq.length()) +
         " markers=" + std::to_string(kMarkerCount) + "\n";
  for (const auto& f : seq.frames) {
    if (f.markers.cols() != kMarkerCount) {
      throw Error(Errc::MarkerMismatch, "frame does not hold " + std::to_string(kMarkerCount) + " markers");
    }
    bool first = true;
    for (int k = 0; k < kMarkerCount; ++k) {
      for (int d = 0; d < 3; ++d) {
        if (!first) out += ' ';
        format_double(out, f.markers(d, k));
        first = false;
      }
    }
    for (int d = 0; d < 3; ++d) {
      out += ' ';
      format_double(out, f.pelvis(d));
    }
    out += '\n';
  }
  if (seq.has_hands()) {
    if (seq.hands->size() != seq.frames.size()) {
      throw Error(Errc::LengthMismatch, "hand track length differs from frame count");
    }
    out += "hands joints=" + std::to_string(kHandJointCount) +
           " frames=" + std::to_string(seq.length()) + "\n";
    for (const auto& pose : *seq.hands) {
      if (static_cast<int>(pose.size()) != kHandJointCount) {
        throw Error(Errc::LengthMismatch, "hand pose does not hold " + std::to_string(kHandJointCount) + " joints");
      }
      bool first = true;
      for (const auto& q : pose) {
        const double vals[4] = {q.w(), q.x(), q.y(), q.z()};
        for (double v : vals) {
          if (!first) out += ' ';
          format_double(out, v);
          first = false;
        }
      }
      out += '\n';
    }
  }
  return out;
}

MotionSequence read_motion_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, "empty motion text");

  int fps = 0, frames = 0, markers = 0;
  if (std::sscanf(line.c_str(), "motion fps=%d frames=%d markers=%d", &fps, &frames, &markers) != 3) {
    throw Error(Errc::ParseError, "bad motion header: " + line);
  }
  if (fps <= 0 || frames < 0 || markers != kMarkerCount) {
    throw Error(Errc::ParseError, "unsupported motion header values");
  }

  MotionSequence seq;
  seq.fps = fps;
  seq.frames.resize(frames);
  for (int i = 0; i < frames; ++i) {
    if (!std::getline(in, line)) throw Error(Errc::ParseError, "truncated motion body");
    std::istringstream row(line);
    std::string tok;
    MarkerFrame& f = seq.frames[i];
    for (int k = 0; k < kMarkerCount; ++k) {
      for (int d = 0; d < 3; ++d) {
        if (!(row >> tok)) throw Error(Errc::ParseError, "short frame row");
        f.markers(d, k) = parse_double(tok);
      }
    }
    for (int d = 0; d < 3; ++d) {
      if (!(row >> tok)) throw Error(Errc::ParseError, "short frame row");
      f.pelvis(d) = parse_double(tok);
    }
    if (row >> tok) throw Error(Errc::ParseError, "trailing values in frame row");
  }

  // Optional hand section.
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int joints = 0, hframes = 0;
    if (std::sscanf(line.c_str(), "hands joints=%d frames=%d", &joints, &hframes) != 2) {
      throw Error(Errc::ParseError, "unexpected line after frames: " + line);
    }
    if (joints != kHandJointCount || hframes != frames) {
      throw Error(Errc::ParseError, "hand section does not match motion header");
    }
    seq.hands.emplace(frames);
    for (int i = 0; i < frames; ++i) {
      if (!std::getline(in, line)) throw Error(Errc::ParseError, "truncated hand section");
      std::istringstream row(line);
      std::string tok;
      HandPose& pose = (*seq.hands)[i];
      pose.resize(kHandJointCount);
      for (int j = 0; j < kHandJointCount; ++j) {
        double q[4];
        for (double& v : q) {
          if (!(row >> tok)) throw Error(Errc::ParseError, "short hand row");
          v = parse_double(tok);
        }
        pose[j] = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
      }
      if (row >> tok) throw Error(Errc::ParseError, "trailing values in hand row");
    }
    break;
  }
  return seq;
}

void save_motion(const MotionSequence& seq, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  out << write_motion_text(seq);
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

MotionSequence load_motion(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_motion_text(buf.str());
}

}  // namespace mkit
