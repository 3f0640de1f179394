#include "mkit/revision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace mkit {
namespace {

MotionSequence slice(const MotionSequence& seq, int begin, int end) {
  MotionSequence out;
  out.fps = seq.fps;
  out.frames.assign(seq.frames.begin() + begin, seq.frames.begin() + end);
  if (seq.has_hands()) {
    out.hands.emplace(seq.hands->begin() + begin, seq.hands->begin() + end);
  }
  return out;
}

MotionSequence concat(MotionSequence first, const MotionSequence& second) {
  first.frames.insert(first.frames.end(), second.frames.begin(), second.frames.end());
  if (first.has_hands() && second.has_hands()) {
    first.hands->insert(first.hands->end(), second.hands->begin(), second.hands->end());
  } else {
    first.hands.reset();
  }
  return first;
}

double total_penetration(const std::vector<double>& per_frame) {
  return std::accumulate(per_frame.begin(), per_frame.end(), 0.0);
}

int collided_frames(const std::vector<double>& per_frame, double threshold) {
  return static_cast<int>(std::count_if(per_frame.begin(), per_frame.end(),
                                        [&](double v) { return v > threshold; }));
}

}  // namespace

std::vector<CollisionInterval> detect_collisions(const std::vector<double>& per_frame, double threshold) {
  std::vector<CollisionInterval> intervals;
  int run_start = -1;
  for (int i = 0; i < static_cast<int>(per_frame.size()); ++i) {
    const bool hot = per_frame[i] > threshold;
    if (hot && run_start < 0) run_start = i;
    if (!hot && run_start >= 0) {
      intervals.push_back({run_start, i - 1});
      run_start = -1;
    }
  }
  if (run_start >= 0) intervals.push_back({run_start, static_cast<int>(per_frame.size()) - 1});
  return intervals;
}

MotionSequence retime_around(const MotionSequence& seq, int start, int end, RetimeRole role) {
  const int n = seq.length();
  if (start < 0 || end >= n || start > end) {
    throw Error(Errc::IndexOutOfRange, "collision interval outside the sequence");
  }

  const int m = (start + end) / 2;
  const int h = (end - start) / 2;
  if (h == 0) return seq;
  if (m - h < 2 || n - m - h < 2) {
    throw Error(Errc::DegenerateInterval, "retiming window leaves too little room");
  }

  const int first_len = (role == RetimeRole::Lead) ? m - h : m + h;
  const int second_len = n - first_len;
  MotionSequence first = resample(slice(seq, 0, m), first_len);
  MotionSequence second = resample(slice(seq, m, n), second_len);
  return concat(std::move(first), second);
}

RevisionResult revise_collisions(const MotionSequence& a, const MotionSequence& b, double threshold,
                                 int max_iterations, const MeshBuilder& builder) {
  if (threshold < 0.0 || max_iterations < 0) {
    throw Error(Errc::BadParams, "threshold and max_iterations must be non-negative");
  }

  RevisionResult res;
  res.a = a;
  res.b = b;

  std::vector<double> per_frame = human_penetration(res.a, res.b, builder).per_frame;
  int count = collided_frames(per_frame, threshold);
  res.report.collided_before = count;

  bool improved = true;
  while (improved && res.report.iterations < max_iterations) {
    const auto intervals = detect_collisions(per_frame, threshold);
    if (intervals.empty()) break;
    ++res.report.iterations;
    improved = false;

    for (const auto& iv : intervals) {
      MotionSequence lead, yield;
      try {
        lead = retime_around(res.a, iv.start, iv.end, RetimeRole::Lead);
        yield = retime_around(res.b, iv.start, iv.end, RetimeRole::Yield);
      } catch (const Error& e) {
        if (e.code() == Errc::DegenerateInterval) continue;
        throw;
      }

      std::vector<double> candidate = human_penetration(lead, yield, builder).per_frame;
      const int candidate_count = collided_frames(candidate, threshold);
      if (candidate_count > count) continue;  // keep only non-worsening retimings

      res.a = std::move(lead);
      res.b = std::move(yield);
      per_frame = std::move(candidate);
      if (candidate_count < count) {
        count = candidate_count;
        improved = true;  // rescan from the first freshly detected interval
        break;
      }
      count = candidate_count;
    }
  }

  res.report.collided_after = count;
  res.report.residual = per_frame.empty() ? 0.0 : total_penetration(per_frame) / per_frame.size();
  res.report.converged = res.report.collided_after == 0;
  return res;
}

std::string write_revision_report_text(const RevisionReport& report) {
  char residual[40];
  std::snprintf(residual, sizeof(residual), "%.9g", report.residual);
  return "iterations=" + std::to_string(report.iterations) +
         "\ncollided_before=" + std::to_string(report.collided_before) +
         "\ncollided_after=" + std::to_string(report.collided_after) + "\nresidual=" + residual +
         "\nconverged=" + (report.converged ? "1" : "0") + "\n";
}

}  // namespace mkit
