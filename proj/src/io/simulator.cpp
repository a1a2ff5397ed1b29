#include "imitation/io/simulator.hpp"

#include "imitation/error.hpp"
#include "imitation/io/replay.hpp"

#include <algorithm>
#include <cmath>

namespace imitation::io {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kFalsePositiveConfidence = 0.5;

bool has(const std::vector<scene::Limb>& limbs, scene::Limb l) {
  return std::find(limbs.begin(), limbs.end(), l) != limbs.end();
}

// The exemplar restricted to the moving body parts; everything else keeps the
// neutral stance.
pose::BodyPose restrict_to(const pose::BodyPose& exemplar, const std::vector<scene::Limb>& limbs) {
  if (limbs.empty()) return exemplar;
  const auto neutral = pose::neutral_pose();
  pose::BodyPose out = neutral;
  if (has(limbs, scene::Limb::RArm)) out.right = exemplar.right;
  if (has(limbs, scene::Limb::LArm)) out.left = exemplar.left;
  if (has(limbs, scene::Limb::Torso)) out.bend = exemplar.bend;
  return out;
}

double ease(double u) { return 0.5 - 0.5 * std::cos(kPi * std::clamp(u, 0.0, 1.0)); }

}  // namespace

std::int64_t perform_transition_ms(double speed) { return std::llround(800.0 / speed); }
std::int64_t perform_hold_ms(double speed) { return std::llround(1000.0 / speed); }

Simulator::Simulator(ScenarioScript script, std::vector<gesture::GestureTemplate> templates)
    : script_(std::move(script)), templates_(std::move(templates)), rng_(script_.seed) {
  for (const auto& e : script_.timeline) {
    if (const auto* p = std::get_if<Perform>(&e.action)) {
      const auto& t = gesture::find_template(templates_, p->gesture);
      for (const auto& kf : t.keyframes) {
        if (!kf.exemplar) {
          throw Error(Errc::InvalidScript, "gesture '" + p->gesture + "' has no exemplar poses");
        }
      }
    }
  }
  const auto neutral = pose::neutral_pose();
  participant_.segments.push_back({0, 0, neutral, neutral});
  model_.segments.push_back({0, 0, neutral, neutral});
}

bool Simulator::done() const { return next_timestamp() > script_.duration_ms; }

std::int64_t Simulator::next_timestamp() const { return replay_timestamp(frame_index_, script_.fps); }

pose::BodyPose Simulator::pose_at(const ActorState& a, std::int64_t t) {
  const Segment* current = &a.segments.front();
  for (const auto& s : a.segments) {
    if (s.t0 <= t) current = &s;
  }
  if (t >= current->t1 || current->t1 == current->t0) return current->to;
  const double u = static_cast<double>(t - current->t0) / static_cast<double>(current->t1 - current->t0);
  return pose::lerp(current->from, current->to, ease(u));
}

void Simulator::apply(const ScriptEntry& entry) {
  ActorState& a = entry.actor == Actor::Participant ? participant_ : model_;
  const std::int64_t t = entry.at_ms;
  std::visit(
      [&](const auto& v) {
        using A = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<A, Perform>) {
          auto tmpl = gesture::find_template(templates_, v.gesture);
          if (v.chirality == gesture::Chirality::Mirrored) tmpl = gesture::mirrored(tmpl);
          const auto transition = perform_transition_ms(v.speed);
          const auto hold = perform_hold_ms(v.speed);
          a.sigma = v.sigma;
          a.bounce_hz = 0.0;
          pose::BodyPose from = pose_at(a, t);
          std::int64_t cursor = t;
          // Drop any plan that had not started yet.
          std::erase_if(a.segments, [&](const Segment& s) { return s.t0 >= t; });
          for (const auto& kf : tmpl.keyframes) {
            const auto to = restrict_to(*kf.exemplar, v.limbs);
            a.segments.push_back({cursor, cursor + transition, from, to});
            cursor += transition + hold;
            from = to;
          }
          a.segments.push_back({cursor, cursor + transition, from, pose::neutral_pose()});
        } else if constexpr (std::is_same_v<A, Idle>) {
          const auto from = pose_at(a, t);
          std::erase_if(a.segments, [&](const Segment& s) { return s.t0 >= t; });
          a.segments.push_back({t, t + perform_transition_ms(1.0), from, pose::neutral_pose()});
          a.sigma = v.sigma;
          a.bounce_hz = v.bounce_hz;
          a.bounce_amplitude = v.bounce_amplitude;
          a.bounce_start = t;
        } else if constexpr (std::is_same_v<A, Hide>) {
          for (const auto l : v.limbs) {
            if (!has(a.hidden, l)) a.hidden.push_back(l);
          }
        } else if constexpr (std::is_same_v<A, Show>) {
          std::erase_if(a.hidden, [&](scene::Limb l) { return has(v.limbs, l); });
        } else if constexpr (std::is_same_v<A, FalsePositive>) {
          false_positives_.push_back({v, t});
        }
      },
      entry.action);
}

void Simulator::apply_until(std::int64_t t) {
  while (next_entry_ < script_.timeline.size() && script_.timeline[next_entry_].at_ms <= t) {
    apply(script_.timeline[next_entry_++]);
  }
}

std::optional<pose::Skeleton> Simulator::render_actor(const ActorState& a, double x, double torso_px,
                                                      std::int64_t t) {
  pose::Placement place;
  place.mid_hip = pose::Point(x, script_.scene.mid_hip_y);
  place.torso_px = torso_px;
  if (a.bounce_hz > 0.0) {
    const double phase = 2.0 * kPi * a.bounce_hz * static_cast<double>(t - a.bounce_start) / 1000.0;
    place.mid_hip.y() -= a.bounce_amplitude * torso_px * std::sin(phase);
  }
  pose::Skeleton s = pose::render(pose_at(a, t), place);

  // Always draw the same number of variates so the stream of one actor does
  // not depend on the other's sigma.
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int j = 0; j < pose::kJointCount; ++j) {
    const double dx = noise(rng_);
    const double dy = noise(rng_);
    s.xy(j, 0) += a.sigma * torso_px * dx;
    s.xy(j, 1) += a.sigma * torso_px * dy;
  }
  const auto conceal = [&](pose::Joint j) {
    s.xy.row(pose::index(j)).setZero();
    s.confidence(pose::index(j)) = 0.0;
  };
  for (const auto l : a.hidden) {
    for (const auto j : scene::limb_joints(l)) conceal(j);
    // Ears belong to no limb but disappear with the head.
    if (l == scene::Limb::Head) {
      conceal(pose::Joint::REar);
      conceal(pose::Joint::LEar);
    }
  }
  if (!(s.confidence > 0.0).any()) return std::nullopt;
  return s;
}

pose::Frame Simulator::next_frame() {
  const std::int64_t t = next_timestamp();
  ++frame_index_;
  apply_until(t);

  pose::Frame frame;
  frame.timestamp_ms = t;
  frame.source = pose::FrameSource::Simulated;
  const auto& sc = script_.scene;
  if (auto m = render_actor(model_, sc.model_x, sc.model_torso_px, t)) frame.skeletons.push_back(*m);
  if (auto p = render_actor(participant_, sc.participant_x, sc.participant_torso_px, t)) {
    frame.skeletons.push_back(*p);
  }
  std::erase_if(false_positives_, [&](const ActiveFalsePositive& f) {
    return f.spec.duration_ms && t >= f.since + *f.spec.duration_ms;
  });
  for (const auto& f : false_positives_) {
    pose::Placement place;
    place.torso_px = sc.participant_torso_px * f.spec.height_ratio;
    place.confidence = kFalsePositiveConfidence;
    // Roughly centre the figure on (x, y): the mid-hip sits a little below the middle.
    place.mid_hip = pose::Point(f.spec.x, f.spec.y + 0.3 * place.torso_px);
    frame.skeletons.push_back(pose::render(pose::neutral_pose(), place));
  }
  return frame;
}

std::vector<session::SessionEvent> Simulator::take_events_until(std::int64_t t) {
  std::vector<session::SessionEvent> out;
  while (next_event_ < script_.timeline.size() && script_.timeline[next_event_].at_ms <= t) {
    const auto& e = script_.timeline[next_event_++];
    if (const auto* o = std::get_if<Observe>(&e.action)) {
      out.push_back({e.at_ms, session::OperatorObservation{o->kind}});
    } else if (const auto* c = std::get_if<IssueCommand>(&e.action)) {
      out.push_back({e.at_ms, c->command});
    }
  }
  return out;
}

SimulatedSession simulate(const ScenarioScript& script, std::vector<gesture::GestureTemplate> templates) {
  Simulator sim(script, std::move(templates));
  SimulatedSession out;
  while (!sim.done()) out.frames.push_back(sim.next_frame());
  out.events = sim.take_events_until(script.duration_ms);
  return out;
}

}  // namespace imitation::io
