#include "fixtures.hpp"
#include "oracle.hpp"

#include "imitation/error.hpp"
#include "imitation/gesture/matcher.hpp"
#include "imitation/gesture/motion.hpp"
#include "imitation/gesture/template_io.hpp"
#include "imitation/io/replay.hpp"
#include "imitation/pose/features.hpp"
#include "imitation/pose/normalize.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace imitation;
using namespace imitation::gesture;
using fixtures::Joint;

namespace {

constexpr double kPi = std::numbers::pi;

struct Stream {
  std::vector<PoseSample> samples;
  std::vector<oracle::Sample> raw;

  void add(const pose::Skeleton& s) {
    const auto t = io::replay_timestamp(samples.size(), 15.0);
    samples.push_back(make_sample(t, s));
    raw.push_back({t, s});
  }
  void add_for(const pose::Skeleton& s, std::int64_t ms) {
    const auto n = static_cast<std::size_t>(std::llround(ms * 15.0 / 1000.0));
    for (std::size_t i = 0; i < n; ++i) add(s);
  }
};

pose::Skeleton right_arm_up() {
  return fixtures::with_arms(fixtures::trunk(), 170, 50, 170, 0, 230, 150, 230, 200);
}

const GestureTemplate& builtin(std::string_view name) {
  static const auto all = builtin_templates();
  return find_template(all, name);
}

GestureTemplate raise_left_arm() {
  return load_templates(fixtures::source_dir() / "config/templates/raise_left_arm.json").at(0);
}

bool keyframe_ok(const KeyframeSpec& kf, const pose::Skeleton& s) {
  const auto f = pose::extract_features(pose::normalize(s));
  return std::all_of(kf.constraints.begin(), kf.constraints.end(),
                     [&](const Constraint& c) { return satisfied(c, f); });
}

std::string name(MatchStatus s) { return std::string(status_name(s)); }

}  // namespace

TEST_CASE("three builtin movements") {
  const auto t = builtin_templates();
  REQUIRE(t.size() == 3);
  CHECK(t[0].name == "raise_arms_sky");
  CHECK(t[1].name == "arms_side_bend_forward");
  CHECK(t[2].name == "arms_forward_bend_toes");
  CHECK(t[0].keyframes.size() == 1);
  CHECK(t[1].keyframes.size() == 2);
  CHECK(t[2].keyframes.size() == 2);
  for (const auto& g : t) {
    for (const auto& kf : g.keyframes) {
      for (const auto l : kf.required_limbs) {
        CHECK(l != scene::Limb::LLeg);
        CHECK(l != scene::Limb::RLeg);
      }
    }
  }
}

TEST_CASE("overhead pose satisfies raise_arms_sky only") {
  CHECK(keyframe_ok(builtin("raise_arms_sky").keyframes[0], fixtures::arms_up()));
  CHECK_FALSE(keyframe_ok(builtin("arms_side_bend_forward").keyframes[0], fixtures::arms_up()));
  CHECK(keyframe_ok(builtin("arms_side_bend_forward").keyframes[0], fixtures::t_pose()));
}

TEST_CASE("neutral then arms overhead for 600 ms succeeds") {
  Stream s;
  s.add_for(fixtures::arms_down(), 1000);
  s.add_for(fixtures::arms_up(), 600);
  const auto& t = builtin("raise_arms_sky");
  const auto r = match_gesture(s.samples, t);
  CHECK(r.status == MatchStatus::Success);
  CHECK(r.chirality == Chirality::Direct);
  CHECK(r.keyframes_matched == 1);
  // Run starts at the first overhead frame (index 15, 1000 ms) and completes
  // once 500 ms have elapsed: frame 23 at 1533 ms.
  REQUIRE(r.keyframe_times[0].has_value());
  CHECK(*r.keyframe_times[0] == io::replay_timestamp(23, 15.0));
  CHECK(oracle::evaluate(s.raw, t).verdict == oracle::Verdict::Success);
}

TEST_CASE("a hold shorter than hold_ms is not enough") {
  Stream s;
  s.add_for(fixtures::arms_down(), 1000);
  s.add_for(fixtures::arms_up(), 400);
  s.add_for(fixtures::arms_down(), 1000);
  const auto r = match_gesture(s.samples, builtin("raise_arms_sky"));
  CHECK(r.status == MatchStatus::AttemptFailed);
  CHECK(r.keyframes_matched == 0);
  CHECK(oracle::evaluate(s.raw, builtin("raise_arms_sky")).verdict == oracle::Verdict::AttemptFailed);
}

TEST_CASE("participant raises the other arm: mirrored match") {
  const auto t = raise_left_arm();
  Stream direct;
  direct.add_for(fixtures::arms_down(), 1000);
  direct.add_for(fixtures::with_arms(fixtures::trunk(), 170, 150, 170, 200, 230, 50, 230, 0), 600);
  const auto d = match_gesture(direct.samples, t);
  CHECK(d.status == MatchStatus::Success);
  CHECK(d.chirality == Chirality::Direct);

  Stream swapped;
  swapped.add_for(fixtures::arms_down(), 1000);
  swapped.add_for(right_arm_up(), 600);
  const auto m = match_gesture(swapped.samples, t);
  CHECK(m.status == MatchStatus::Success);
  CHECK(m.chirality == Chirality::Mirrored);
  const auto o = oracle::evaluate(swapped.raw, t);
  CHECK(o.verdict == oracle::Verdict::Success);
  CHECK(o.keyframes_direct == 0);
  CHECK(o.keyframes_mirrored == 1);
}

TEST_CASE("an unmatched one-sided gesture is judged on the visible side") {
  // Only the right arm is in view and it never rises: read as the mirrored
  // gesture the arm is visible, so the stream is scoreable either way round.
  auto one_arm = fixtures::trunk();
  one_arm.set(Joint::RElbow, 170, 150, 0.9);
  one_arm.set(Joint::RWrist, 170, 200, 0.9);
  Stream s;
  s.add_for(one_arm, 2000);
  Stream reflected;
  reflected.add_for(pose::mirror(one_arm), 2000);

  const auto t = raise_left_arm();
  const auto a = match_gesture(s.samples, t);
  const auto b = match_gesture(reflected.samples, t);
  CHECK(a.status == MatchStatus::NoAttempt);
  CHECK(a.chirality == Chirality::Mirrored);
  CHECK(b.status == MatchStatus::NoAttempt);
  CHECK(b.chirality == Chirality::Direct);
  CHECK(a.unscoreable_fraction == 0.0);
  CHECK(oracle::evaluate(s.raw, t).verdict == oracle::Verdict::NoAttempt);
}

TEST_CASE("fidgeting that never reaches the pose is a failed attempt") {
  Stream s;
  for (int i = 0; i < 45; ++i) {
    const double dx = i % 2 ? 20.0 : -20.0;
    s.add(fixtures::with_arms(fixtures::trunk(), 170, 150, 170 + dx, 200, 230, 150, 230 - dx, 200));
  }
  const auto& t = builtin("raise_arms_sky");
  const auto o = oracle::evaluate(s.raw, t);
  REQUIRE(o.energy > 0.02);
  const auto r = match_gesture(s.samples, t);
  CHECK(r.status == MatchStatus::AttemptFailed);
  CHECK(r.keyframes_matched == 0);
  CHECK(r.energy == doctest::Approx(o.energy));
  CHECK(o.verdict == oracle::Verdict::AttemptFailed);
}

TEST_CASE("standing still is no attempt") {
  Stream s;
  s.add_for(fixtures::arms_down(), 3000);
  const auto r = match_gesture(s.samples, builtin("raise_arms_sky"));
  CHECK(r.status == MatchStatus::NoAttempt);
  CHECK(r.energy == 0.0);
}

TEST_CASE("arms out of view is unscoreable") {
  Stream s;
  auto hidden = fixtures::trunk();
  s.add_for(hidden, 3000);
  const auto r = match_gesture(s.samples, builtin("raise_arms_sky"));
  CHECK(r.status == MatchStatus::Unscoreable);
  CHECK(r.unscoreable_fraction == 1.0);
  CHECK(oracle::evaluate(s.raw, builtin("raise_arms_sky")).verdict == oracle::Verdict::Unscoreable);
}

TEST_CASE("frames after the timeout are ignored") {
  auto t = builtin("raise_arms_sky");
  t.timeout_ms = 1000;
  Stream s;
  s.add_for(fixtures::arms_down(), 1500);
  s.add_for(fixtures::arms_up(), 1000);
  CHECK(match_gesture(s.samples, t).status == MatchStatus::NoAttempt);
}

TEST_CASE("matcher input errors") {
  std::vector<PoseSample> none;
  try {
    (void)match_gesture(none, builtin("raise_arms_sky"));
    FAIL("expected EmptyStream");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyStream);
  }
  std::vector<PoseSample> twice{make_sample(10, fixtures::arms_up()), make_sample(10, fixtures::arms_up())};
  CHECK_THROWS_AS((void)match_gesture(twice, builtin("raise_arms_sky")), Error);
}

TEST_CASE("mirror pose command") {
  SUBCASE("right arm raised sets left targets") {
    const auto cmd = mirror_pose_command(right_arm_up());
    CHECK(cmd.targets.at("l_shoulder_elev") == doctest::Approx(kPi).epsilon(1e-6));
    CHECK(cmd.targets.at("r_shoulder_elev") == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("T-pose") {
    const auto cmd = mirror_pose_command(fixtures::t_pose());
    CHECK(cmd.targets.at("l_shoulder_elev") == doctest::Approx(kPi / 2).epsilon(1e-6));
    CHECK(cmd.targets.at("r_shoulder_elev") == doctest::Approx(kPi / 2).epsilon(1e-6));
  }
  SUBCASE("hidden left arm is omitted") {
    auto s = fixtures::t_pose();
    s.set(Joint::LElbow, 0, 0, 0.0);
    s.set(Joint::LWrist, 0, 0, 0.0);
    const auto cmd = mirror_pose_command(s);
    // The participant's left arm drives the mirror's right side.
    CHECK_FALSE(cmd.targets.contains("r_elbow"));
    CHECK_FALSE(cmd.targets.contains("r_shoulder_elev"));
    CHECK(cmd.targets.contains("l_elbow"));
  }
}

TEST_CASE("arm length calibration") {
  Stream s;
  s.add_for(fixtures::t_pose(), 500);
  // Upper arm 30 px + forearm 30 px over a 100 px torso.
  const auto len = calibrate_arm_length(s.samples);
  REQUIRE(len.has_value());
  CHECK(*len == doctest::Approx(0.6));
}

namespace {

std::vector<PoseSample> wave(double hz, double amplitude_px, std::int64_t ms, double fps = 15.0) {
  std::vector<PoseSample> out;
  for (std::size_t i = 0;; ++i) {
    const auto t = io::replay_timestamp(i, fps);
    if (t > ms) break;
    const double dy = amplitude_px * std::sin(2 * kPi * hz * t / 1000.0);
    out.push_back(make_sample(
        t, fixtures::with_arms(fixtures::trunk(), 140, 100 + dy / 2, 110, 100 + dy, 260, 100 + dy / 2,
                               290, 100 + dy)));
  }
  return out;
}

}  // namespace

TEST_CASE("motion statistics") {
  SUBCASE("static stream") {
    std::vector<PoseSample> s;
    for (int i = 0; i < 45; ++i) s.push_back(make_sample(io::replay_timestamp(i, 15), fixtures::t_pose()));
    const auto m = motion_stats(s, 3000);
    CHECK(m.energy == 0.0);
    CHECK_FALSE(m.rhythm_period_ms.has_value());
  }
  SUBCASE("1 Hz arm wave") {
    const auto m = motion_stats(wave(1.0, 40.0, 4000), 4000);
    REQUIRE(m.rhythm_period_ms.has_value());
    CHECK(*m.rhythm_period_ms == doctest::Approx(1000.0).epsilon(0.10));
  }
  SUBCASE("0.5 Hz wave") {
    const auto m = motion_stats(wave(0.5, 40.0, 6000), 6000);
    REQUIRE(m.rhythm_period_ms.has_value());
    CHECK(*m.rhythm_period_ms == doctest::Approx(2000.0).epsilon(0.10));
  }
  SUBCASE("energy doubling raises the change flag") {
    const auto a = motion_stats(wave(1.0, 20.0, 3000), 3000);
    const auto b = motion_stats(wave(1.0, 40.0, 3000), 3000);
    CHECK(b.energy / a.energy == doctest::Approx(2.0).epsilon(0.05));
    CHECK(activity_changed(a, b, 1.5));
    CHECK(activity_changed(b, a, 1.5));
    CHECK_FALSE(activity_changed(a, a, 1.5));
  }
  SUBCASE("too few samples") {
    std::vector<PoseSample> one{make_sample(0, fixtures::t_pose())};
    CHECK_THROWS_AS((void)motion_stats(one, 3000), Error);
  }
}

TEST_CASE("template JSON round trip and validation") {
  for (const auto& t : builtin_templates()) {
    const auto back = template_from_json(to_json(t));
    CHECK(to_json(back) == to_json(t));
  }
  auto bad = to_json(builtin("raise_arms_sky"));
  bad["keyframes"][0]["constraints"][2]["tolerance"] = 0.0;
  try {
    (void)template_from_json(bad);
    FAIL("expected InvalidTemplate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidTemplate);
  }
  auto unknown = to_json(builtin("raise_arms_sky"));
  unknown["keyframes"][0]["constraints"][0]["feature"] = "tail_wag";
  CHECK_THROWS_AS((void)template_from_json(unknown), Error);
}

TEST_CASE("mirrored template swaps sides") {
  const auto t = raise_left_arm();
  const auto m = mirrored(t);
  CHECK(m.keyframes[0].required_limbs == std::vector{scene::Limb::RArm});
  CHECK(m.keyframes[0].constraints[0].feature == pose::Feature::RWristAboveHead);
  CHECK(to_json(mirrored(m)) == to_json(t));
}

TEST_CASE("unknown gesture") {
  try {
    (void)builtin("jumping_jacks");
    FAIL("expected UnknownGesture");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownGesture);
  }
}

TEST_CASE("status names") {
  CHECK(name(MatchStatus::AttemptFailed) == "attempt_failed");
  CHECK(status_from_name("no_attempt") == MatchStatus::NoAttempt);
  CHECK(chirality_from_name("mirrored") == Chirality::Mirrored);
  CHECK_FALSE(status_from_name("maybe").has_value());
}
