#pragma once

#include "imitation/gateway/config.hpp"
#include "imitation/gesture/matcher.hpp"
#include "imitation/io/simulator.hpp"
#include "imitation/scene/tracker.hpp"
#include "imitation/session/engine.hpp"
#include "imitation/store/store.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace imitation::gateway {

// A console-bound message before sequencing: type is one of frame, state,
// outcome, suggestion, warning, command (echo of an applied operator command)
// or observe (echo of an applied observation).
struct WireEvent {
  std::string type;
  nlohmann::json body;
};

// Drives one session: frames go through the false-positive filter, the
// tracker and role assignment; the participant's samples feed the matcher
// while a demonstration window is open and the motion statistics while the
// model mirrors. Operator events and matcher verdicts reach the engine in
// timestamp order. Not thread-safe; the server calls it from one thread.
class SessionRunner {
 public:
  SessionRunner(GatewayConfig config, session::SessionState initial,
                store::SessionStore* store = nullptr, std::int64_t started_at = 0);

  // Frames must arrive with non-decreasing timestamps.
  void on_frame(const pose::Frame& frame);
  // Applies an operator event. Throws Error(IllegalTransition) unchanged.
  void on_event(const session::SessionEvent& event);
  void tick(std::int64_t timestamp_ms);
  // Ends the stream: a session that has not reached closing is aborted with a
  // warning. Writes the summary to the store when one is attached.
  void finish();
  // Records a warning in the session and sends it to the console.
  void add_warning(const std::string& text);

  const session::SessionState& state() const { return engine_.state(); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<scene::TrackedPerson>& tracks() const { return tracker_.tracks; }
  store::SessionRecord record() const;
  nlohmann::json state_json() const;

  std::function<void(const WireEvent&)> on_output;

 private:
  void apply(const session::SessionEvent& event);
  void handle(const session::EngineOutput& out);
  void emit(std::string type, nlohmann::json body);
  void persist();
  void submit_match(std::int64_t t, bool final_verdict);
  void update_roles();
  void check_model_visibility(const pose::Frame& frame);
  void matcher_step(const gesture::PoseSample& sample);
  void mirroring_step(const gesture::PoseSample& sample);
  void broadcast_frame(const pose::Frame& frame);

  GatewayConfig config_;
  std::vector<gesture::GestureTemplate> templates_;
  session::Engine engine_;
  store::SessionStore* store_;
  std::int64_t started_at_;
  std::size_t persisted_ = 0;
  std::vector<std::string> warnings_;

  scene::TrackerState tracker_;
  bool roles_warned_ = false;
  bool model_low_ = false;

  // Demonstration window being matched, keyed by (movement, opened_at).
  std::optional<std::pair<int, std::int64_t>> match_key_;
  std::vector<gesture::PoseSample> match_buffer_;
  std::optional<gesture::MatchResult> last_match_;
  bool verdict_sent_ = false;

  std::optional<std::pair<int, std::int64_t>> motion_key_;
  std::vector<gesture::PoseSample> motion_buffer_;
  std::optional<gesture::MotionStats> last_motion_;
  std::int64_t next_motion_at_ = 0;

  std::optional<std::int64_t> last_broadcast_;
  bool finished_ = false;
};

struct RunResult {
  store::SessionRecord record;
  std::vector<WireEvent> messages;  // only when requested
  std::size_t rejected_events = 0;  // scripted events the engine refused
};

// Headless end-to-end run of a scenario script. The participant profile from
// the script is registered in the store (or a private registry) if missing.
RunResult run_scenario(const io::ScenarioScript& script, const GatewayConfig& config,
                       store::SessionStore* store = nullptr, bool capture_messages = false);

// Replay of recorded frames with the script's operator events.
RunResult run_frames(const std::vector<pose::Frame>& frames, const io::ScenarioScript& script,
                     const GatewayConfig& config, store::SessionStore* store = nullptr);

}  // namespace imitation::gateway
