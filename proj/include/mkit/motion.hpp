#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <optional>
#include <string>
#include <vector>

#include "mkit/error.hpp"

namespace mkit {

inline constexpr int kMarkerCount = 67;
inline constexpr int kHandJointCount = 30;

/// Marker indices with structural meaning. The defaults follow this
/// toolkit's convention: hips at 30/31, feet occupying 59..66. Callers with
/// differently ordered marker sets can supply their own layout.
struct MarkerLayout {
  int left_hip = 30;
  int right_hip = 31;
  std::vector<int> foot_markers = {59, 60, 61, 62, 63, 64, 65, 66};
};

/// One frame of full-body capture: 67 markers (columns) plus the pelvis
/// position used as the body's root.
struct MarkerFrame {
  Eigen::Matrix3Xd markers;  // 3 x kMarkerCount
  Eigen::Vector3d pelvis;

  MarkerFrame() : markers(Eigen::Matrix3Xd::Zero(3, kMarkerCount)), pelvis(Eigen::Vector3d::Zero()) {}
};

/// Rotations for the 30 hand joints of one frame (15 per hand).
using HandPose = std::vector<Eigen::Quaterniond>;

/// A marker sequence at a fixed frame rate, with optional per-frame hand
/// joint rotations riding along.
struct MotionSequence {
  std::vector<MarkerFrame> frames;
  int fps = 40;
  std::optional<std::vector<HandPose>> hands;

  int length() const { return static_cast<int>(frames.size()); }
  bool has_hands() const { return hands.has_value(); }
};

enum class CanonicalMode { Initial, PelvisLocal };

/// Two sequences expressed in a shared local frame, plus everything needed
/// to restore the original world placement exactly.
struct CanonicalPair {
  MotionSequence a;
  MotionSequence b;
  CanonicalMode mode = CanonicalMode::Initial;
  // Original world pelvis positions, one per frame, for each character.
  std::vector<Eigen::Vector3d> pelvis_track_a;
  std::vector<Eigen::Vector3d> pelvis_track_b;
  // Yaw removed at frame 0 (Initial mode only).
  double frame0_yaw = 0.0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
};

/// Shift both characters into a frame anchored at character A's first-frame
/// pelvis, rotated about z so A initially faces +y. Rigid in-plane motion of
/// the input pair therefore does not change the canonical output.
CanonicalPair canonicalize_initial(const MotionSequence& a, const MotionSequence& b,
                                   const MarkerLayout& layout = MarkerLayout{});

/// Express every frame of both characters relative to that frame's own
/// pelvis. Bodies become translation-free; the pelvis trajectories carry the
/// original placement.
CanonicalPair canonicalize_pelvis_local(const MotionSequence& a, const MotionSequence& b);

/// Invert either canonicalization, restoring world coordinates exactly.
std::pair<MotionSequence, MotionSequence> decanonicalize(const CanonicalPair& pair);

/// Forward-difference pelvis velocities scaled by fps; the last frame
/// repeats the previous velocity so the output length matches the input.
std::vector<Eigen::Vector3d> pelvis_velocities(const MotionSequence& seq);

/// Resample to new_len frames with linear marker/pelvis interpolation and
/// spherical interpolation for hand joints. new_len == length() returns the
/// input unchanged.
MotionSequence resample(const MotionSequence& seq, int new_len);

/// Gather marker positions out of a vertex matrix using an index map.
Eigen::Matrix3Xd extract_markers(const Eigen::Matrix3Xd& vertices, const std::vector<int>& index_map);

// --- text round-trip -------------------------------------------------------

std::string write_motion_text(const MotionSequence& seq);
MotionSequence read_motion_text(const std::string& text);

void save_motion(const MotionSequence& seq, const std::string& path);
MotionSequence load_motion(const std::string& path);

}  // namespace mkit
