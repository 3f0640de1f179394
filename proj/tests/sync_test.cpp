#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "mkit/sync.hpp"

using namespace mkit;
using testutil::random_hands;
using testutil::random_quat;
using testutil::standing_frame;
using testutil::walk_x;

namespace {

bool frames_equal(const MarkerFrame& a, const MarkerFrame& b) {
  return a.markers == b.markers && a.pelvis == b.pelvis;
}

bool hands_equal(const HandPose& a, const HandPose& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].coeffs() != b[j].coeffs()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("slerp matches Eigen's implementation on random pairs") {
  Rng rng(211);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Quaterniond a = random_quat(rng);
    const Eigen::Quaterniond b = random_quat(rng);
    for (double t : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      const Eigen::Quaterniond got = slerp(a, b, t);
      const Eigen::Quaterniond want = a.slerp(t, b);
      // Same rotation up to sign.
      CHECK(std::abs(std::abs(got.dot(want)) - 1.0) < 1e-12);
      CHECK(got.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("slerp halves a quarter turn exactly") {
  const Eigen::Quaterniond a = Eigen::Quaterniond::Identity();
  const Eigen::Quaterniond b(Eigen::AngleAxisd(M_PI / 2.0, Eigen::Vector3d::UnitZ()));
  const Eigen::Quaterniond mid = slerp(a, b, 0.5);
  const Eigen::Quaterniond want(Eigen::AngleAxisd(M_PI / 4.0, Eigen::Vector3d::UnitZ()));
  CHECK(std::abs(mid.dot(want)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("slerp hits its endpoints and takes the short way round") {
  Rng rng(223);
  const Eigen::Quaterniond a = random_quat(rng);
  const Eigen::Quaterniond b = random_quat(rng);
  CHECK(std::abs(slerp(a, b, 0.0).dot(a)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(slerp(a, b, 1.0).dot(b)) == doctest::Approx(1.0).epsilon(1e-12));

  // Against the antipode the arc length is zero.
  Eigen::Quaterniond neg;
  neg.coeffs() = -a.coeffs();
  const Eigen::Quaterniond out = slerp(a, neg, 0.5);
  CHECK(std::abs(out.dot(a)) == doctest::Approx(1.0).epsilon(1e-12));

  // Interpolating toward a sign-flipped target never swings wide: the angle
  // to `a` grows monotonically but stays below the direct angle.
  Eigen::Quaterniond c = random_quat(rng);
  if (a.dot(c) > 0.0) c.coeffs() = -c.coeffs();
  const double direct = std::acos(std::min(1.0, std::abs(a.dot(c))));
  for (double t : {0.2, 0.5, 0.8}) {
    const double step = std::acos(std::min(1.0, std::abs(a.dot(slerp(a, c, t)))));
    CHECK(step <= direct + 1e-12);
  }
}

TEST_CASE("junction blend eases the buffer and copies the rest") {
  const MotionSequence prev = walk_x(3, {0, 0, 1}, 0.1);
  const MotionSequence next = walk_x(10, {5, 2, 1}, 0.1);
  const MotionSequence out = blend_junction(prev, next, 4);

  REQUIRE(out.length() == 13);
  CHECK(out.fps == prev.fps);
  for (int f = 0; f < 3; ++f) CHECK(frames_equal(out.frames[f], prev.frames[f]));

  const MarkerFrame& anchor = prev.frames.back();
  const MarkerFrame& landing = next.frames[4];
  for (int f = 0; f < 4; ++f) {
    const double t = static_cast<double>(f + 1) / 5.0;
    const Eigen::Matrix3Xd want = (1.0 - t) * anchor.markers + t * landing.markers;
    CHECK(out.frames[3 + f].markers == want);
    CHECK(out.frames[3 + f].pelvis == ((1.0 - t) * anchor.pelvis + t * landing.pelvis));
  }
  for (int f = 4; f < 10; ++f) CHECK(frames_equal(out.frames[3 + f], next.frames[f]));
}

TEST_CASE("junction blend with buffer zero concatenates verbatim") {
  const MotionSequence prev = walk_x(2, {0, 0, 1}, 0.1);
  const MotionSequence next = walk_x(3, {4, 0, 1}, 0.1);
  const MotionSequence out = blend_junction(prev, next, 0);
  REQUIRE(out.length() == 5);
  for (int f = 0; f < 2; ++f) CHECK(frames_equal(out.frames[f], prev.frames[f]));
  for (int f = 0; f < 3; ++f) CHECK(frames_equal(out.frames[2 + f], next.frames[f]));
}

TEST_CASE("junction buffer clamps to the landing sequence") {
  const MotionSequence prev = walk_x(2, {0, 0, 1}, 0.1);
  const MotionSequence next = walk_x(3, {4, 0, 1}, 0.1);
  const MotionSequence out = blend_junction(prev, next, 10);  // b = 2
  REQUIRE(out.length() == 5);
  const MarkerFrame& landing = next.frames[2];
  for (int f = 0; f < 2; ++f) {
    const double t = static_cast<double>(f + 1) / 3.0;
    CHECK(out.frames[2 + f].markers ==
          ((1.0 - t) * prev.frames.back().markers + t * landing.markers));
  }
  CHECK(frames_equal(out.frames[4], landing));
}

TEST_CASE("junction blend is stationary at an equal endpoint") {
  MotionSequence prev = walk_x(3, {1, 1, 1}, 0.0);
  MotionSequence next = walk_x(5, {1, 1, 1}, 0.0);
  const MotionSequence out = blend_junction(prev, next, 3);
  for (int f = 0; f < out.length(); ++f) CHECK(frames_equal(out.frames[f], prev.frames[0]));
}

TEST_CASE("junction blend eases hand joints when both sides carry them") {
  Rng rng(227);
  MotionSequence prev = walk_x(3, {0, 0, 1}, 0.1);
  MotionSequence next = walk_x(6, {3, 0, 1}, 0.1);
  prev.hands = random_hands(3, rng);
  next.hands = random_hands(6, rng);

  const MotionSequence out = blend_junction(prev, next, 2);
  REQUIRE(out.has_hands());
  REQUIRE(out.hands->size() == 9);
  for (int f = 0; f < 3; ++f) CHECK(hands_equal((*out.hands)[f], (*prev.hands)[f]));
  for (int f = 0; f < 2; ++f) {
    const double t = static_cast<double>(f + 1) / 3.0;
    const HandPose& got = (*out.hands)[3 + f];
    REQUIRE(got.size() == static_cast<std::size_t>(kHandJointCount));
    for (std::size_t j = 0; j < got.size(); ++j) {
      const Eigen::Quaterniond want = slerp((*prev.hands).back()[j], (*next.hands)[2][j], t);
      CHECK(got[j].coeffs() == want.coeffs());
    }
  }
  for (int f = 2; f < 6; ++f) CHECK(hands_equal((*out.hands)[3 + f], (*next.hands)[f]));
}

TEST_CASE("junction blend drops the hand channel on one-sided input") {
  Rng rng(229);
  MotionSequence prev = walk_x(3, {0, 0, 1}, 0.1);
  prev.hands = random_hands(3, rng);
  const MotionSequence next = walk_x(4, {2, 0, 1}, 0.1);
  CHECK_FALSE(blend_junction(prev, next, 2).has_hands());
  CHECK_FALSE(blend_junction(next, prev, 2).has_hands());
}

TEST_CASE("junction blend validates its inputs") {
  const MotionSequence good = walk_x(4, {0, 0, 1}, 0.1);
  MotionSequence empty;
  empty.fps = good.fps;
  CHECK_THROWS_AS(blend_junction(empty, good, 4), Error);
  CHECK_THROWS_AS(blend_junction(good, empty, 4), Error);

  MotionSequence slow = good;
  slow.fps = 30;
  CHECK_THROWS_AS(blend_junction(good, slow, 4), Error);

  MotionSequence narrow = good;
  for (auto& f : narrow.frames) f.markers = Eigen::Matrix3Xd::Zero(3, 5);
  CHECK_THROWS_AS(blend_junction(good, narrow, 4), Error);

  CHECK_THROWS_AS(blend_junction(good, good, -1), Error);

  Rng rng(233);
  MotionSequence a = walk_x(3, {0, 0, 1}, 0.1);
  MotionSequence b = walk_x(3, {1, 0, 1}, 0.1);
  a.hands = random_hands(3, rng);
  b.hands = random_hands(3, rng, 5);  // different joint count
  CHECK_THROWS_AS(blend_junction(a, b, 2), Error);
}

TEST_CASE("order segmentation splits after each interaction") {
  const std::vector<std::string> orders = {"walk", "HHI: Two persons hug with each other",
                                           "[sofa, sit]", "stool",
                                           "HHI: Two persons fight with each other"};
  const auto segs = segment_orders(orders);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].commands == std::vector<std::string>{orders[0], orders[1]});
  CHECK(segs[0].pre_hhi_count == 1);
  CHECK(segs[0].has_hhi);
  CHECK(segs[1].commands == std::vector<std::string>{orders[2], orders[3], orders[4]});
  CHECK(segs[1].pre_hhi_count == 2);
  CHECK(segs[1].has_hhi);
}

TEST_CASE("order segmentation keeps a trailing run and empty input") {
  const auto trailing = segment_orders({"HHI: hug", "walk", "run"});
  REQUIRE(trailing.size() == 2);
  CHECK(trailing[0].pre_hhi_count == 0);
  CHECK(trailing[0].has_hhi);
  CHECK(trailing[1].commands == std::vector<std::string>{"walk", "run"});
  CHECK(trailing[1].pre_hhi_count == 2);
  CHECK_FALSE(trailing[1].has_hhi);

  CHECK(segment_orders({}).empty());

  // The interaction tag is case-sensitive and anchored to the front.
  const auto not_tags = segment_orders({"hhi: hug", "say HHI: hi"});
  REQUIRE(not_tags.size() == 1);
  CHECK_FALSE(not_tags[0].has_hhi);
  CHECK(not_tags[0].pre_hhi_count == 2);
}

TEST_CASE("order segmentation preserves every command in order") {
  Rng rng(239);
  std::vector<std::string> orders;
  for (int i = 0; i < 40; ++i) {
    if (rng.uniform01() < 0.3) {
      orders.push_back("HHI: interaction " + std::to_string(i));
    } else {
      orders.push_back("command " + std::to_string(i));
    }
  }
  const auto segs = segment_orders(orders);
  std::vector<std::string> flattened;
  for (const auto& s : segs) {
    const int expect_pre =
        s.has_hhi ? static_cast<int>(s.commands.size()) - 1 : static_cast<int>(s.commands.size());
    CHECK(s.pre_hhi_count == expect_pre);
    flattened.insert(flattened.end(), s.commands.begin(), s.commands.end());
  }
  CHECK(flattened == orders);
}

TEST_CASE("segment alignment budgets the slower character") {
  const auto a = segment_orders({"walk", "[sofa, sit]", "HHI: hug"});
  const auto b = segment_orders({"walk", "stool", "[chair, sit]", "walk", "HHI: hug"});
  const auto plan = align_segment_lengths(a, b, 1.25, 40);
  REQUIRE(plan.size() == 1);
  CHECK(plan[0].target_frames == 200);
  CHECK(plan[0].pad_a == 100);
  CHECK(plan[0].pad_b == 0);
}

TEST_CASE("segment alignment pads the empty side fully") {
  const auto a = segment_orders({"HHI: hug"});
  const auto b = segment_orders({"x", "y", "z", "HHI: hug"});
  const auto plan = align_segment_lengths(a, b, 1.25, 40);
  REQUIRE(plan.size() == 1);
  CHECK(plan[0].target_frames == 150);
  CHECK(plan[0].pad_a == 150);
  CHECK(plan[0].pad_b == 0);
}

TEST_CASE("segment alignment rounds half-frames up") {
  const auto a = segment_orders({"x"});
  const auto b = segment_orders({"x"});
  // 1 command * 0.75 s * 30 fps = 22.5 -> 23.
  const auto plan = align_segment_lengths(a, b, 0.75, 30);
  REQUIRE(plan.size() == 1);
  CHECK(plan[0].target_frames == 23);
  CHECK(plan[0].pad_a == 0);
  CHECK(plan[0].pad_b == 0);
}

TEST_CASE("segment alignment always zeroes one pad per segment") {
  Rng rng(241);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> oa, ob;
    const int segs = rng.uniform_int(1, 4);
    for (int s = 0; s < segs; ++s) {
      for (int i = rng.uniform_int(0, 5); i > 0; --i) oa.push_back("a");
      for (int i = rng.uniform_int(0, 5); i > 0; --i) ob.push_back("b");
      oa.push_back("HHI: x");
      ob.push_back("HHI: x");
    }
    const auto plan = align_segment_lengths(segment_orders(oa), segment_orders(ob));
    for (const auto& p : plan) {
      CHECK(std::min(p.pad_a, p.pad_b) == 0);
      CHECK(p.pad_a >= 0);
      CHECK(p.pad_b >= 0);
      CHECK(p.target_frames >= std::max(p.pad_a, p.pad_b));
    }
  }
}

TEST_CASE("segment alignment rejects unpairable structures") {
  const auto two = segment_orders({"a", "HHI: x", "b", "HHI: y"});
  const auto one = segment_orders({"a", "HHI: x"});
  CHECK_THROWS_AS(align_segment_lengths(two, one), Error);

  // Same count but one trailing segment lacks the interaction.
  const auto closed = segment_orders({"a", "HHI: x"});
  const auto open = segment_orders({"a", "b"});
  CHECK_THROWS_AS(align_segment_lengths(closed, open), Error);

  CHECK_THROWS_AS(align_segment_lengths(one, one, 0.0, 40), Error);
  CHECK_THROWS_AS(align_segment_lengths(one, one, 1.25, 0), Error);
}

TEST_CASE("hover padding appends noisy copies of the final frame") {
  Rng rng(251);
  MotionSequence seq = walk_x(5, {0, 0, 1}, 0.1);
  seq.hands = random_hands(5, rng);

  Rng pad_rng(999);
  const MotionSequence out = pad_with_hover(seq, 50, pad_rng);
  REQUIRE(out.length() == 55);
  REQUIRE(out.hands->size() == 55);

  // Originals untouched.
  for (int f = 0; f < 5; ++f) {
    CHECK(frames_equal(out.frames[f], seq.frames[f]));
    CHECK(hands_equal((*out.hands)[f], (*seq.hands)[f]));
  }

  const MarkerFrame& last = seq.frames.back();
  for (int f = 5; f < 55; ++f) {
    // Marker noise stays within 6 sigma of the held frame.
    CHECK(((out.frames[f].markers - last.markers).cwiseAbs().maxCoeff()) < 6.0 * 0.002);
    // Pelvis wanders at most 0.01 m horizontally; vertically only noise.
    const Eigen::Vector3d drift = out.frames[f].pelvis - last.pelvis;
    CHECK(drift.head<2>().norm() <= 0.01 + 1e-12);
    CHECK(std::abs(drift.z()) < 6.0 * 0.002);
    // Hands repeat the final pose.
    CHECK(hands_equal((*out.hands)[f], seq.hands->back()));
  }
}

TEST_CASE("hover padding is deterministic and honors edge cases") {
  const MotionSequence seq = walk_x(4, {0, 0, 1}, 0.05);
  Rng r1(77), r2(77);
  const MotionSequence a = pad_with_hover(seq, 12, r1);
  const MotionSequence b = pad_with_hover(seq, 12, r2);
  REQUIRE(a.length() == b.length());
  for (int f = 0; f < a.length(); ++f) CHECK(frames_equal(a.frames[f], b.frames[f]));

  Rng r3(77);
  const MotionSequence zero = pad_with_hover(seq, 0, r3);
  REQUIRE(zero.length() == 4);
  for (int f = 0; f < 4; ++f) CHECK(frames_equal(zero.frames[f], seq.frames[f]));

  MotionSequence empty;
  CHECK_THROWS_AS(pad_with_hover(empty, 3, r3), Error);
  CHECK_THROWS_AS(pad_with_hover(seq, -1, r3), Error);
}
