#pragma once

#include <Eigen/Geometry>
#include <string>
#include <vector>

#include "mkit/error.hpp"
#include "mkit/motion.hpp"
#include "mkit/rng.hpp"

namespace mkit {

/// Shortest-arc spherical interpolation; falls back to normalized linear
/// interpolation for nearly identical rotations.
Eigen::Quaterniond slerp(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double t);

/// Concatenate two sequences, easing the first buffer_frames of `next`
/// toward it from the last frame of `prev`: frame f of the buffer is the
/// interpolation at t = (f + 1) / (b + 1) between prev's final frame and
/// next's frame b, where b is buffer_frames clamped to next.length() - 1.
/// Hand joints blend the same way when both inputs carry them; otherwise
/// the hand channel is dropped.
MotionSequence blend_junction(const MotionSequence& prev, const MotionSequence& next, int buffer_frames = 4);

/// One character's order list split at interaction commands.
struct OrderSegment {
  std::vector<std::string> commands;  // includes the trailing interaction, if any
  int pre_hhi_count = 0;              // commands before the interaction
  bool has_hhi = false;
};

/// Split an order list after every "HHI:" command; a trailing run without
/// one forms a final segment.
std::vector<OrderSegment> segment_orders(const std::vector<std::string>& orders);

/// Frame budget for one aligned segment pair.
struct SegmentAlignment {
  int target_frames = 0;  // frames both characters should occupy
  int pad_a = 0;          // hover frames character A needs
  int pad_b = 0;
};

/// Pair up the two characters' segments and size each pair to the slower
/// character: a command is budgeted clip_seconds * fps frames, and the
/// shorter side pads the difference. Throws HhiCountMismatch when the
/// segment structures cannot be paired.
std::vector<SegmentAlignment> align_segment_lengths(const std::vector<OrderSegment>& a,
                                                    const std::vector<OrderSegment>& b,
                                                    double clip_seconds = 1.25, int fps = 40);

/// Append pad_frames hover frames: each is the original final frame plus
/// fresh per-coordinate noise (sigma 0.002 m), with the pelvis kept within
/// 0.01 m horizontally. Hand poses repeat the final pose.
MotionSequence pad_with_hover(const MotionSequence& seq, int pad_frames, Rng& rng);

}  // namespace mkit
