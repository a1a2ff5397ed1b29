#pragma once

#include "imitation/gesture/template.hpp"
#include "imitation/io/scenario.hpp"
#include "imitation/pose/body_model.hpp"
#include "imitation/session/types.hpp"

#include <random>
#include <vector>

namespace imitation::io {

struct SimulatedSession {
  std::vector<pose::Frame> frames;
  std::vector<session::SessionEvent> events;  // scripted observations and commands, in order
};

// Frame-by-frame synthesis of a scenario. Frame i is stamped
// round(i * 1000 / fps) and frames run up to and including duration_ms.
// Output is a pure function of (script, templates).
class Simulator {
 public:
  // Throws Error(UnknownGesture) if the script performs a gesture that is not
  // among `templates`, Error(InvalidScript) if one lacks exemplar poses.
  explicit Simulator(ScenarioScript script,
                     std::vector<gesture::GestureTemplate> templates = gesture::builtin_templates());

  bool done() const;
  std::int64_t next_timestamp() const;
  pose::Frame next_frame();

  // Scripted session events with at_ms <= t that have not been taken yet.
  std::vector<session::SessionEvent> take_events_until(std::int64_t t);

  const ScenarioScript& script() const { return script_; }

 private:
  struct Segment {
    std::int64_t t0 = 0;
    std::int64_t t1 = 0;
    pose::BodyPose from;
    pose::BodyPose to;
  };
  struct ActorState {
    std::vector<Segment> segments;
    double sigma = 0.003;
    double bounce_hz = 0.0;
    double bounce_amplitude = 0.0;
    std::int64_t bounce_start = 0;
    std::vector<scene::Limb> hidden;
  };
  struct ActiveFalsePositive {
    FalsePositive spec;
    std::int64_t since = 0;
  };

  void apply_until(std::int64_t t);
  void apply(const ScriptEntry& entry);
  static pose::BodyPose pose_at(const ActorState& a, std::int64_t t);
  std::optional<pose::Skeleton> render_actor(const ActorState& a, double x, double torso_px,
                                             std::int64_t t);

  ScenarioScript script_;
  std::vector<gesture::GestureTemplate> templates_;
  ActorState participant_;
  ActorState model_;
  std::vector<ActiveFalsePositive> false_positives_;
  std::size_t next_entry_ = 0;  // timeline entries applied to the scene
  std::size_t next_event_ = 0;  // timeline entries scanned for session events
  std::size_t frame_index_ = 0;
  std::mt19937_64 rng_;
};

SimulatedSession simulate(const ScenarioScript& script,
                          std::vector<gesture::GestureTemplate> templates = gesture::builtin_templates());

// Timing of a scripted perform at the given speed.
std::int64_t perform_transition_ms(double speed);
std::int64_t perform_hold_ms(double speed);

}  // namespace imitation::io
