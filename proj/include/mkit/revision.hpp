#pragma once

#include <vector>

#include "mkit/error.hpp"
#include "mkit/metrics.hpp"
#include "mkit/motion.hpp"

namespace mkit {

/// Inclusive frame range [start, end] where two bodies overlap.
struct CollisionInterval {
  int start = 0;
  int end = 0;
};

/// Maximal runs of frames whose penetration fraction exceeds the threshold,
/// as inclusive [first, last] ranges in ascending order.
std::vector<CollisionInterval> detect_collisions(const std::vector<double>& per_frame, double threshold);

enum class RetimeRole {
  Lead,   // hurry through the collision window, then relax
  Yield,  // hold back through it, then catch up
};

/// Length-preserving retiming around the inclusive interval [start, end]:
/// with midpoint m = (start+end)/2 and half-width h = (end-start)/2, the
/// lead squeezes its first m frames into m - h and stretches the rest,
/// while the yield does the mirror image. Both bodies then pass the
/// contested frames at different times. A zero-width interval returns the
/// input unchanged; windows leaving fewer than two frames on either side
/// (m - h < 2 or length - m - h < 2) throw DegenerateInterval.
MotionSequence retime_around(const MotionSequence& seq, int start, int end, RetimeRole role);

struct RevisionReport {
  int iterations = 0;       // detection passes spent
  int collided_before = 0;  // colliding frame count at entry
  int collided_after = 0;   // colliding frame count at exit
  double residual = 0.0;    // final mean penetration fraction
  bool converged = false;   // no frame exceeds the threshold anymore
};

struct RevisionResult {
  MotionSequence a;
  MotionSequence b;
  RevisionReport report;
};

/// Iteratively retime the pair around detected collision intervals until
/// none remain or max_iterations detection passes are spent. Each candidate
/// retimes A as lead and B as yield around one interval; it is kept when the
/// colliding-frame count does not grow, and a strict drop restarts the scan
/// from the first freshly detected interval. A pass that finds no strict
/// improvement across all intervals ends the loop.
RevisionResult revise_collisions(const MotionSequence& a, const MotionSequence& b,
                                 double threshold = 0.02, int max_iterations = 8,
                                 const MeshBuilder& builder = marker_hull_mesh);

/// Line-delimited key=value rendering of the report.
std::string write_revision_report_text(const RevisionReport& report);

}  // namespace mkit
