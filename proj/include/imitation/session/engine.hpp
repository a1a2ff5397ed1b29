#pragma once

#include "imitation/session/types.hpp"
#include "imitation/store/registry.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace imitation::session {

// ---------------------------------------------------------------- rubric
//
// Scoring is a pure function of the events that fell inside a window. Event
// timing inside the window never matters.

PhaseOutcome score_greetings(std::span<const StampedEvent> window, const RubricConfig& config = {});
PhaseOutcome score_pairing(std::span<const StampedEvent> window, const RubricConfig& config = {});

// A missing match result counts as no_attempt. match_seq, when given, is the
// sequence number of the algorithm event that carried the result.
PhaseOutcome score_imitation_movement(std::span<const StampedEvent> events,
                                      const std::optional<gesture::MatchResult>& match,
                                      std::optional<std::uint64_t> match_seq = std::nullopt);

// ActivityChange events never contribute; only operator observations score.
PhaseOutcome score_mirroring(std::span<const StampedEvent> events, const RubricConfig& config = {});

// Best code under 3a = 3b > 2a = 2b > 1a = 1b, ties toward the 'a' family.
// with_objects is set if any movement used objects.
PhaseOutcome aggregate_imitation(std::span<const PhaseOutcome> movements);

// ---------------------------------------------------------------- engine

enum class SessionStatus { Running, Completed, Aborted };
std::string_view status_name(SessionStatus s) noexcept;

struct PhaseChanged {
  Phase from;
  Phase to;
};
struct WindowArmed {
  std::int64_t opened_at = 0;
  std::int64_t deadline = 0;
};
struct OutcomeEmitted {
  PhaseOutcome outcome;
  bool aggregate = false;
};
struct MirroringActive {
  bool active = false;
  int movement = 0;
};
struct Suggestion {
  std::string text;
  gesture::MotionStats stats;
};
struct Warning {
  std::string text;
};
struct RoleAssignment {
  scene::TrackId track = 0;
  scene::Role role = scene::Role::Participant;
};
struct SessionEnded {
  SessionStatus status = SessionStatus::Completed;
};

using EngineOutput = std::variant<PhaseChanged, WindowArmed, OutcomeEmitted, MirroringActive,
                                  Suggestion, Warning, RoleAssignment, SessionEnded>;

struct SessionState {
  std::string session_id;
  std::string participant_id;
  RubricConfig config;
  SessionStatus status = SessionStatus::Running;
  Phase phase;
  std::int64_t clock = 0;

  // Armed wait window of the current phase/mode, [opened_at, deadline).
  std::optional<std::int64_t> window_opened_at;
  std::optional<std::int64_t> deadline;
  // First log index belonging to the current movement mode (imitation scoring
  // counts every observation since the mode was entered).
  std::size_t mode_log_start = 0;
  bool objects_in_use = false;
  std::optional<gesture::MatchResult> current_match;
  std::optional<std::uint64_t> current_match_seq;

  std::vector<StampedEvent> log;
  std::vector<PhaseOutcome> outcomes;  // per phase and per movement, in decision order
  std::optional<PhaseOutcome> imitation_aggregate;
  std::uint64_t next_seq = 1;

  bool finished() const { return status != SessionStatus::Running; }
};

// Throws Error(UnknownParticipant) for an unregistered id and
// Error(InvalidConfig) for a bad rubric. An empty session_id is replaced by a
// process-unique "<participant>-<n>".
SessionState start_session(const store::ParticipantRegistry& registry,
                           const std::string& participant_id, const RubricConfig& config = {},
                           std::string session_id = {});

struct StepResult {
  SessionState state;
  std::vector<EngineOutput> outputs;
};

// Deterministic transition. Timestamps earlier than the engine clock are
// clamped to it. Windows whose deadline is at or before the event time expire
// first (auto-score, auto-advance). Throws Error(IllegalTransition) for events
// not legal in the current phase, including any non-tick event once the
// session has finished; ticks after the end are no-ops.
StepResult step(SessionState state, const SessionEvent& event);

// Event kinds accepted in a phase; the operator console mirrors these.
std::vector<Observation> legal_observations(const Phase& phase);
std::vector<CommandKind> legal_commands(const Phase& phase);

// In-place convenience wrapper around step().
class Engine {
 public:
  explicit Engine(SessionState state) : state_(std::move(state)) {}

  std::vector<EngineOutput> apply(const SessionEvent& event);
  std::vector<EngineOutput> tick(std::int64_t timestamp_ms) {
    return apply({timestamp_ms, ClockTick{}});
  }
  const SessionState& state() const { return state_; }

 private:
  SessionState state_;
};

// Re-run the engine over a recorded log (effective timestamps, in order).
SessionState replay(const std::string& session_id, const std::string& participant_id,
                    const RubricConfig& config, std::span<const StampedEvent> log);

}  // namespace imitation::session
