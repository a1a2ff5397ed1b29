#include "fixtures.hpp"
#include "oracle.hpp"

#include "imitation/error.hpp"
#include "imitation/scene/filter.hpp"
#include "imitation/scene/tracker.hpp"

#include <doctest.h>

using namespace imitation;
using namespace imitation::scene;
using fixtures::Joint;

namespace {

pose::Skeleton shifted(pose::Skeleton s, double dx, double dy = 0.0) {
  s.xy.col(0).array() += dx;
  s.xy.col(1).array() += dy;
  return s;
}

pose::Skeleton scaled(pose::Skeleton s, double k) {
  s.xy *= k;
  return s;
}

pose::Frame frame(std::int64_t t, std::vector<pose::Skeleton> people) {
  return pose::Frame{t, std::move(people), pose::FrameSource::Replay};
}

// Full 18-joint skeleton from the eyes (y=75) to the ankles (y=360): 285 px.
pose::Skeleton full() { return fixtures::with_legs(fixtures::t_pose()); }

}  // namespace

TEST_CASE("visibility of an upper-body-only skeleton") {
  // Nose, neck, shoulders, elbows, wrists, hips and eyes: 12 of 18.
  const auto s = fixtures::t_pose();
  const auto v = visibility(s);
  CHECK(v.coverage == doctest::Approx(12.0 / 18.0));
  CHECK(v.head);
  CHECK(v.torso);
  CHECK(v.r_arm);
  CHECK(v.l_arm);
  CHECK_FALSE(v.r_leg);
  CHECK_FALSE(v.l_leg);
}

TEST_CASE("visibility of full and nearly empty skeletons") {
  const auto v = visibility(full());
  CHECK(v.coverage == 1.0);
  for (const auto l : kAllLimbs) CHECK(v.limb(l));

  const auto one = visibility(fixtures::skeleton({{Joint::Neck, 1, 1}}));
  CHECK(one.coverage == doctest::Approx(1.0 / 18.0));
  for (const auto l : kAllLimbs) CHECK_FALSE(one.limb(l));
}

TEST_CASE("limb joint lists match the oracle") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const auto s = fixtures::random_skeleton(rng, 0.7);
    const auto v = visibility(s);
    for (const auto l : kAllLimbs) CHECK(v.limb(l) == oracle::limb_visible(s, l));
  }
}

TEST_CASE("miniature wall skeleton is rejected") {
  // A 200 px person and a 15 px detection on the wall motifs: 15 < 0.3 * 200.
  const auto person = scaled(full(), 200.0 / 285.0);
  const auto tiny = shifted(scaled(full(), 15.0 / 285.0), 500.0, 10.0);
  REQUIRE(pose::bounding_box(person).height() == doctest::Approx(200.0));
  REQUIRE(pose::bounding_box(tiny).height() == doctest::Approx(15.0));

  const auto out = reject_false_positives(frame(0, {tiny, person}));
  REQUIRE(out.skeletons.size() == 1);
  CHECK(out.skeletons[0] == person);
}

TEST_CASE("single skeleton passes unchanged") {
  const auto out = reject_false_positives(frame(5, {full()}));
  REQUIRE(out.skeletons.size() == 1);
  CHECK(out.skeletons[0] == full());
  CHECK(out.timestamp_ms == 5);
}

TEST_CASE("two genuine people are both kept") {
  const auto a = scaled(full(), 200.0 / 285.0);
  const auto b = shifted(scaled(full(), 180.0 / 285.0), 300.0);
  CHECK(reject_false_positives(frame(0, {a, b})).skeletons.size() == 2);
}

TEST_CASE("low coverage detections are dropped first") {
  const auto ghost = fixtures::skeleton({{Joint::Nose, 10, 10}, {Joint::Neck, 10, 400}});
  const auto out = reject_false_positives(frame(0, {ghost, full()}));
  REQUIRE(out.skeletons.size() == 1);
  CHECK(out.skeletons[0] == full());
}

TEST_CASE("tracking keeps ids across small moves and short occlusions") {
  TrackerState st;
  st = track(st, frame(0, {full()}));
  REQUIRE(st.tracks.size() == 1);
  const auto id = st.tracks[0].track_id;

  st = track(st, frame(67, {shifted(full(), 3.0)}));
  REQUIRE(st.tracks.size() == 1);
  CHECK(st.tracks[0].track_id == id);

  // Gone for two frames, back 20 px further on: well inside max_jump.
  st = track(st, frame(133, {}));
  st = track(st, frame(200, {}));
  CHECK(st.tracks.size() == 1);
  st = track(st, frame(267, {shifted(full(), 23.0)}));
  REQUIRE(st.tracks.size() == 1);
  CHECK(st.tracks[0].track_id == id);
}

TEST_CASE("stale tracks expire") {
  TrackerState st;
  st = track(st, frame(0, {full()}));
  st = track(st, frame(1500, {}));
  CHECK(st.tracks.empty());
  st = track(st, frame(1600, {full()}));
  REQUIRE(st.tracks.size() == 1);
  CHECK(st.tracks[0].track_id == 2);
}

TEST_CASE("crossing people: greedy assignment equals brute force") {
  // Two people walk toward each other along x, 12 px per frame each.
  TrackerState st;
  std::vector<std::array<double, 2>> previous;
  for (int i = 0; i <= 12; ++i) {
    const double xa = 100.0 + 12.0 * i;
    const double xb = 300.0 - 12.0 * i;
    const auto a = shifted(full(), xa - 200.0);
    const auto b = shifted(full(), xb - 200.0, 4.0);
    const std::vector<pose::Skeleton> people = i % 2 ? std::vector{b, a} : std::vector{a, b};
    const auto before = st.tracks;
    st = track(st, frame(i * 67, people));
    REQUIRE(st.tracks.size() == 2);
    if (i == 0) continue;

    std::vector<std::array<double, 2>> prev_anchors;
    for (const auto& t : before) {
      const auto p = anchor_point(t.last_skeleton);
      prev_anchors.push_back({p.x(), p.y()});
    }
    std::vector<std::array<double, 2>> cur;
    for (const auto& s : people) {
      const auto p = anchor_point(s);
      cur.push_back({p.x(), p.y()});
    }
    const auto expected = oracle::brute_force_assignment(prev_anchors, cur);
    for (std::size_t c = 0; c < people.size(); ++c) {
      const auto want = before[static_cast<std::size_t>(expected[c])].track_id;
      const auto it = std::find_if(st.tracks.begin(), st.tracks.end(), [&](const TrackedPerson& p) {
        return p.last_skeleton == people[c];
      });
      REQUIRE(it != st.tracks.end());
      CHECK(it->track_id == want);
    }
  }
}

TEST_CASE("roles by side") {
  TrackerState st;
  st = track(st, frame(0, {shifted(full(), 200.0), full()}));
  const auto tracks = assign_roles(st.tracks, BySide{Side::Left});
  const auto* model = find_role(tracks, Role::Model);
  const auto* participant = find_role(tracks, Role::Participant);
  REQUIRE(model != nullptr);
  REQUIRE(participant != nullptr);
  CHECK(model->mean_neck_x() < participant->mean_neck_x());
  CHECK(roles_settled(tracks));

  const auto flipped = assign_roles(st.tracks, BySide{Side::Right});
  CHECK(find_role(flipped, Role::Model)->mean_neck_x() > find_role(flipped, Role::Participant)->mean_neck_x());
}

TEST_CASE("by side with one track is ambiguous") {
  TrackerState st;
  st = track(st, frame(0, {full()}));
  try {
    (void)assign_roles(st.tracks, BySide{});
    FAIL("expected AmbiguousRoles");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AmbiguousRoles);
  }
}

TEST_CASE("operator role assignment sticks to the track") {
  TrackerState st;
  st.next_id = 7;
  st = track(st, frame(0, {full()}));
  REQUIRE(st.tracks[0].track_id == 7);
  st.tracks = assign_roles(st.tracks, ByOperator{7, Role::Participant});
  for (int i = 1; i < 10; ++i) st = track(st, frame(i * 67, {shifted(full(), 2.0 * i)}));
  REQUIRE(st.tracks.size() == 1);
  CHECK(st.tracks[0].track_id == 7);
  CHECK(st.tracks[0].role == Role::Participant);

  CHECK_THROWS_AS((void)assign_roles(st.tracks, ByOperator{99, Role::Model}), Error);
}
