#include "mkit/sync.hpp"

#include <algorithm>
#include <cmath>

namespace mkit {
namespace {

bool is_hhi(const std::string& command) { return command.rfind("HHI:", 0) == 0; }

int frames_for(int command_count, double clip_seconds, int fps) {
  return static_cast<int>(std::floor(command_count * clip_seconds * fps + 0.5));
}

}  // namespace

Eigen::Quaterniond slerp(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double t) {
  Eigen::Quaterniond q1 = b;
  double dot = a.dot(b);
  if (dot < 0.0) {
    q1.coeffs() = -q1.coeffs();
    dot = -dot;
  }
  dot = std::min(dot, 1.0);
  const double angle = std::acos(dot);

  Eigen::Quaterniond out;
  if (angle < 1e-6) {
    out.coeffs() = (1.0 - t) * a.coeffs() + t * q1.coeffs();
  } else {
    const double s = std::sin(angle);
    const double w0 = std::sin((1.0 - t) * angle) / s;
    const double w1 = std::sin(t * angle) / s;
    out.coeffs() = w0 * a.coeffs() + w1 * q1.coeffs();
  }
  out.normalize();
  return out;
}

MotionSequence blend_junction(const MotionSequence& prev, const MotionSequence& next, int buffer_frames) {
  if (prev.frames.empty() || next.frames.empty()) {
    throw Error(Errc::EmptyInput, "junction blend requires non-empty sequences");
  }
  if (prev.fps != next.fps) {
    throw Error(Errc::FpsMismatch, "junction inputs run at different frame rates");
  }
  if (prev.frames.front().markers.cols() != next.frames.front().markers.cols()) {
    throw Error(Errc::MarkerMismatch, "junction inputs carry different marker counts");
  }
  if (buffer_frames < 0) throw Error(Errc::BadParams, "buffer_frames must be non-negative");

  const int b = std::min(buffer_frames, next.length() - 1);
  const bool blend_hands = prev.has_hands() && next.has_hands();

  MotionSequence out;
  out.fps = prev.fps;
  out.frames = prev.frames;
  out.frames.reserve(prev.frames.size() + next.frames.size());
  if (blend_hands) {
    out.hands = prev.hands;
    out.hands->reserve(prev.frames.size() + next.frames.size());
  }

  const MarkerFrame& anchor = prev.frames.back();
  const MarkerFrame& landing = next.frames[b];
  for (int f = 0; f < next.length(); ++f) {
    if (f < b) {
      const double t = static_cast<double>(f + 1) / (b + 1);
      MarkerFrame blended;
      blended.markers = (1.0 - t) * anchor.markers + t * landing.markers;
      blended.pelvis = (1.0 - t) * anchor.pelvis + t * landing.pelvis;
      out.frames.push_back(std::move(blended));
      if (blend_hands) {
        const HandPose& ha = prev.hands->back();
        const HandPose& hl = (*next.hands)[b];
        if (ha.size() != hl.size()) {
          throw Error(Errc::LengthMismatch, "hand poses carry different joint counts");
        }
        HandPose pose(ha.size());
        for (std::size_t j = 0; j < ha.size(); ++j) pose[j] = slerp(ha[j], hl[j], t);
        out.hands->push_back(std::move(pose));
      }
    } else {
      out.frames.push_back(next.frames[f]);
      if (blend_hands) out.hands->push_back((*next.hands)[f]);
    }
  }
  return out;
}

std::vector<OrderSegment> segment_orders(const std::vector<std::string>& orders) {
  std::vector<OrderSegment> segments;
  OrderSegment current;
  for (const auto& cmd : orders) {
    current.commands.push_back(cmd);
    if (is_hhi(cmd)) {
      current.has_hhi = true;
      current.pre_hhi_count = static_cast<int>(current.commands.size()) - 1;
      segments.push_back(std::move(current));
      current = OrderSegment{};
    }
  }
  if (!current.commands.empty()) {
    current.pre_hhi_count = static_cast<int>(current.commands.size());
    segments.push_back(std::move(current));
  }
  return segments;
}

std::vector<SegmentAlignment> align_segment_lengths(const std::vector<OrderSegment>& a,
                                                    const std::vector<OrderSegment>& b,
                                                    double clip_seconds, int fps) {
  if (a.size() != b.size()) {
    throw Error(Errc::HhiCountMismatch, "characters hold different segment counts");
  }
  if (clip_seconds <= 0.0 || fps <= 0) throw Error(Errc::BadParams, "clip_seconds and fps must be positive");

  std::vector<SegmentAlignment> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].has_hhi != b[i].has_hhi) {
      throw Error(Errc::HhiCountMismatch, "segment " + std::to_string(i) + " pairs an interaction with none");
    }
    SegmentAlignment align;
    const int frames_a = frames_for(a[i].pre_hhi_count, clip_seconds, fps);
    const int frames_b = frames_for(b[i].pre_hhi_count, clip_seconds, fps);
    align.target_frames = std::max(frames_a, frames_b);
    align.pad_a = align.target_frames - frames_a;
    align.pad_b = align.target_frames - frames_b;
    out.push_back(align);
  }
  return out;
}

MotionSequence pad_with_hover(const MotionSequence& seq, int pad_frames, Rng& rng) {
  if (seq.frames.empty()) throw Error(Errc::EmptyInput, "cannot pad an empty sequence");
  if (pad_frames < 0) throw Error(Errc::BadParams, "pad_frames must be non-negative");

  MotionSequence out = seq;
  const MarkerFrame last = seq.frames.back();
  constexpr double kNoiseSigma = 0.002;
  constexpr double kMaxPelvisDrift = 0.01;

  for (int f = 0; f < pad_frames; ++f) {
    MarkerFrame frame = last;
    for (int k = 0; k < frame.markers.cols(); ++k) {
      for (int d = 0; d < 3; ++d) {
        frame.markers(d, k) += rng.normal(0.0, kNoiseSigma);
      }
    }
    Eigen::Vector3d drift;
    for (int d = 0; d < 3; ++d) drift(d) = rng.normal(0.0, kNoiseSigma);
    const double horizontal = drift.head<2>().norm();
    if (horizontal > kMaxPelvisDrift) drift.head<2>() *= kMaxPelvisDrift / horizontal;
    frame.pelvis = last.pelvis + drift;
    out.frames.push_back(std::move(frame));
    if (out.has_hands()) out.hands->push_back(seq.hands->back());
  }
  return out;
}

}  // namespace mkit
