#pragma once

#include "imitation/gesture/matcher.hpp"
#include "imitation/gesture/motion.hpp"
#include "imitation/scene/tracker.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace imitation::session {

enum class PhaseKind { Greetings, Pairing, Imitation, Closing, Aborted };
enum class ImitationMode { Demonstrate, Mirroring };

struct Phase {
  PhaseKind kind = PhaseKind::Greetings;
  int movement = 0;  // Imitation only, 0..movement_count-1
  bool with_objects = false;
  ImitationMode mode = ImitationMode::Demonstrate;
  std::int64_t entered_at = 0;

  bool operator==(const Phase&) const = default;
};

std::string_view phase_kind_name(PhaseKind kind) noexcept;
std::optional<PhaseKind> phase_kind_from_name(std::string_view name) noexcept;
std::string_view mode_name(ImitationMode mode) noexcept;
// "greetings", "pairing", "imitation:1:demonstrate", "closing", "aborted"
std::string phase_label(const Phase& phase);

// Rubric codes. Greetings/Pairing use 3/2/1, a demonstrated movement
// 3a/2a/1a, a mirroring episode 3b/2b/1b.
enum class Code { C3, C2, C1, C3a, C2a, C1a, C3b, C2b, C1b };

std::string_view code_name(Code code) noexcept;
std::optional<Code> code_from_name(std::string_view name) noexcept;
int code_level(Code code) noexcept;  // 3, 2 or 1
bool code_legal_for(Code code, PhaseKind phase, ImitationMode mode) noexcept;

enum class Observation {
  HandReach,
  HandHold,
  Smile,
  HeadTowards,
  JointAttention,
  ImitationAttempt,
  PositiveReaction,
  IncreasedAttention,
};

enum class CommandKind { AdvancePhase, UseObjects, StartMirroring, ReDemonstrate, AssignRole, Abort };

std::string_view observation_name(Observation o) noexcept;
std::optional<Observation> observation_from_name(std::string_view name) noexcept;
std::string_view command_name(CommandKind c) noexcept;
std::optional<CommandKind> command_from_name(std::string_view name) noexcept;

struct OperatorObservation {
  Observation kind = Observation::Smile;
  bool operator==(const OperatorObservation&) const = default;
};
struct GestureMatched {
  int movement = 0;
  gesture::MatchResult result;
  bool operator==(const GestureMatched&) const = default;
};
struct GestureFailed {
  int movement = 0;
  gesture::MatchResult result;
  bool operator==(const GestureFailed&) const = default;
};
struct ActivityChange {
  gesture::MotionStats stats;
  bool operator==(const ActivityChange&) const = default;
};
struct Command {
  CommandKind kind = CommandKind::AdvancePhase;
  // AssignRole only.
  std::optional<scene::TrackId> track;
  scene::Role role = scene::Role::Participant;
  bool operator==(const Command&) const = default;
};
// Clock progression. Logged only when it expires a window.
struct ClockTick {
  bool operator==(const ClockTick&) const = default;
};

using Payload = std::variant<OperatorObservation, GestureMatched, GestureFailed, ActivityChange,
                             Command, ClockTick>;

struct SessionEvent {
  std::int64_t timestamp_ms = 0;
  Payload payload;
};

// An event as recorded by the engine: sequence number, effective (monotone)
// timestamp and the phase it was received in.
struct StampedEvent {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  std::string phase;
  Payload payload;

  bool operator==(const StampedEvent&) const = default;
};

struct PhaseOutcome {
  PhaseKind phase = PhaseKind::Greetings;
  int movement = -1;  // -1 for non-imitation phases and the session aggregate
  Code code = Code::C1;
  std::vector<std::uint64_t> evidence;  // seq of contributing events
  bool with_objects = false;
  std::int64_t decided_at = 0;

  bool operator==(const PhaseOutcome&) const = default;
};

struct RubricConfig {
  std::int64_t wait_window_ms = 30000;       // greetings and pairing
  std::int64_t imitation_window_ms = 20000;  // per demonstrated movement attempt
  std::int64_t mirroring_window_ms = 30000;
  int movement_count = 3;
  // Cue-to-code toggles: which signs of interest earn the intermediate code.
  bool greetings_smile_counts = true;
  bool greetings_head_counts = true;
  bool pairing_smile_counts = true;
  bool pairing_head_counts = true;
  bool mirroring_attention_counts = true;

  bool operator==(const RubricConfig&) const = default;
};

// Throws Error(InvalidConfig) for non-positive windows or movement count.
void validate(const RubricConfig& config);

}  // namespace imitation::session
