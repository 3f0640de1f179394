#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mkit/error.hpp"
#include "mkit/geometry.hpp"
#include "mkit/motion.hpp"
#include "mkit/sdf.hpp"

namespace mkit {

/// Ground-contact settings shared by the foot metrics.
struct ContactParams {
  std::vector<int> foot_markers = MarkerLayout{}.foot_markers;
  double height_eps = 0.05;  // a foot this close to the ground is in contact
  double ground_z = 0.0;
};

/// Mean horizontal speed (m/s) of foot markers over the frames where they
/// are in contact with the ground (z - ground_z <= height_eps). Zero when no
/// contact occurs; throws TooShort for sequences under two frames.
double foot_skate(const MotionSequence& seq, const ContactParams& cp = ContactParams{});

/// Mean depth (m) that foot markers sink below the ground plane, averaged
/// over every frame and foot marker.
double floor_penetration(const MotionSequence& seq, const ContactParams& cp = ContactParams{});

/// Body-into-scene penetration against an occupancy grid.
struct ScenePenetration {
  double depth = 0.0;      // mean per frame of summed clamped penetration
  double indicator = 0.0;  // mean per frame of penetrating marker count
  std::vector<double> per_frame;
};

ScenePenetration scene_penetration(const MotionSequence& seq, const SdfGrid& grid);

/// Builds a closed body proxy mesh from one frame of markers.
using MeshBuilder = std::function<TriMesh(const MarkerFrame&)>;

/// Default proxy: convex hull of the frame's markers.
TriMesh marker_hull_mesh(const MarkerFrame& f);

/// Person-into-person penetration: per frame, the fraction of each body's
/// proxy-mesh vertices that the winding-number test places inside the other
/// body, mutual counts over total vertices.
struct MutualPenetration {
  double mean = 0.0;
  std::vector<double> per_frame;
};

MutualPenetration human_penetration(const MotionSequence& a, const MotionSequence& b,
                                    const MeshBuilder& builder = marker_hull_mesh,
                                    double threshold = 0.5);

/// Same measurement over explicit per-frame body meshes.
MutualPenetration human_penetration(const std::vector<TriMesh>& a, const std::vector<TriMesh>& b,
                                    double threshold = 0.5);

/// Pairwise-structure deviation: sum over every ordered marker pair of the
/// absolute change in the pair's L1 distance between x and x_ref.
double scene_reg(const Eigen::Matrix3Xd& x, const Eigen::Matrix3Xd& x_ref);

/// Per-marker deviation: sum of Euclidean distances between matching
/// markers of x and x_ref.
double human_reg(const Eigen::Matrix3Xd& x, const Eigen::Matrix3Xd& x_ref);

/// Everything above for a two-person clip in one pass.
struct MetricsReport {
  double fs_a = 0.0, fs_b = 0.0;
  double fp_a = 0.0, fp_b = 0.0;
  double hsp_a = 0.0, hsp_b = 0.0;
  double hsp_indicator_a = 0.0, hsp_indicator_b = 0.0;
  double hhp = 0.0;
};

MetricsReport compute_metrics(const MotionSequence& a, const MotionSequence& b, const SdfGrid& grid,
                              const ContactParams& cp = ContactParams{},
                              const MeshBuilder& builder = marker_hull_mesh);

/// Line-delimited key=value rendering with 9 significant digits.
std::string write_metrics_text(const MetricsReport& report);

}  // namespace mkit
