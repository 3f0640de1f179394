// Shared builders for the unit tests: deterministic sequences, frames and
// proxy meshes small enough to reason about by hand.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "mkit/motion.hpp"
#include "mkit/geometry.hpp"
#include "mkit/rng.hpp"

namespace testutil {

/// Fresh scratch directory under the system temp path; unique per call.
inline std::string temp_dir() {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("mkit_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir.string();
}

/// Write `text` to `path`, creating parent directories as needed.
inline void write_file(const std::string& path, const std::string& text) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// Read a whole file as a string (empty if missing).
inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// A standing frame: pelvis at `pelvis`, markers spread deterministically
/// around it, feet (markers 59..66) at foot_z.
inline mkit::MarkerFrame standing_frame(const Eigen::Vector3d& pelvis, double foot_z = 0.02) {
  mkit::MarkerFrame f;
  f.pelvis = pelvis;
  for (int k = 0; k < mkit::kMarkerCount; ++k) {
    const double a = 0.37 * k;
    f.markers(0, k) = pelvis.x() + 0.25 * std::cos(a);
    f.markers(1, k) = pelvis.y() + 0.15 * std::sin(a);
    f.markers(2, k) = pelvis.z() + 0.8 * std::sin(0.11 * k);
  }
  const mkit::MarkerLayout layout;
  f.markers.col(layout.left_hip) = pelvis + Eigen::Vector3d(-0.12, 0.0, 0.05);
  f.markers.col(layout.right_hip) = pelvis + Eigen::Vector3d(0.12, 0.0, 0.05);
  for (int m : layout.foot_markers) {
    f.markers(2, m) = foot_z;
  }
  return f;
}

/// `frames` standing frames walking along +x at `step` metres per frame.
inline mkit::MotionSequence walk_x(int frames, const Eigen::Vector3d& start, double step,
                                   int fps = 40) {
  mkit::MotionSequence seq;
  seq.fps = fps;
  for (int i = 0; i < frames; ++i) {
    seq.frames.push_back(standing_frame(start + Eigen::Vector3d(step * i, 0.0, 0.0)));
  }
  return seq;
}

/// Random unit quaternion from the shared deterministic stream.
inline Eigen::Quaterniond random_quat(mkit::Rng& rng) {
  Eigen::Quaterniond q(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0), rng.normal(0.0, 1.0),
                       rng.normal(0.0, 1.0));
  q.normalize();
  return q;
}

inline std::vector<mkit::HandPose> random_hands(int frames, mkit::Rng& rng,
                                                int joints = mkit::kHandJointCount) {
  std::vector<mkit::HandPose> hands(static_cast<std::size_t>(frames));
  for (auto& pose : hands) {
    pose.resize(static_cast<std::size_t>(joints));
    for (auto& q : pose) q = random_quat(rng);
  }
  return hands;
}

/// Closed axis-aligned box mesh (8 vertices, 12 outward triangles).
inline mkit::TriMesh box_mesh(const Eigen::Vector3d& center, const Eigen::Vector3d& half) {
  mkit::TriMesh mesh;
  mesh.vertices.resize(3, 8);
  int c = 0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        mesh.vertices.col(c++) = center + Eigen::Vector3d((2 * dx - 1) * half.x(),
                                                          (2 * dy - 1) * half.y(),
                                                          (2 * dz - 1) * half.z());
      }
    }
  }
  // Two triangles per face, wound counter-clockwise seen from outside.
  static const int faces[12][3] = {
      {0, 2, 1}, {1, 2, 3},  // z-
      {4, 5, 6}, {5, 7, 6},  // z+
      {0, 1, 4}, {1, 5, 4},  // y-
      {2, 6, 3}, {3, 6, 7},  // y+
      {0, 4, 2}, {2, 4, 6},  // x-
      {1, 3, 5}, {3, 7, 5},  // x+
  };
  mesh.triangles.resize(3, 12);
  for (int t = 0; t < 12; ++t) {
    mesh.triangles(0, t) = faces[t][0];
    mesh.triangles(1, t) = faces[t][1];
    mesh.triangles(2, t) = faces[t][2];
  }
  return mesh;
}

}  // namespace testutil
