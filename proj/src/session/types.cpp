#include "imitation/session/types.hpp"

#include "imitation/error.hpp"

#include <array>

namespace imitation::session {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 5> kPhaseNames = {"greetings", "pairing", "imitation",
                                                         "closing", "aborted"};
constexpr std::array<std::string_view, 9> kCodeNames = {"3", "2", "1", "3a", "2a",
                                                        "1a", "3b", "2b", "1b"};
constexpr std::array<std::string_view, 8> kObservationNames = {
    "HandReach",        "HandHold",         "Smile",            "HeadTowards",
    "JointAttention",   "ImitationAttempt", "PositiveReaction", "IncreasedAttention"};
constexpr std::array<std::string_view, 6> kCommandNames = {
    "AdvancePhase", "UseObjects", "StartMirroring", "ReDemonstrate", "AssignRole", "Abort"};

}  // namespace

std::string_view phase_kind_name(PhaseKind kind) noexcept {
  return kPhaseNames[static_cast<std::size_t>(kind)];
}

std::optional<PhaseKind> phase_kind_from_name(std::string_view name) noexcept {
  return lookup<PhaseKind>(kPhaseNames, name);
}

std::string_view mode_name(ImitationMode mode) noexcept {
  return mode == ImitationMode::Demonstrate ? "demonstrate" : "mirroring";
}

std::string phase_label(const Phase& phase) {
  std::string label(phase_kind_name(phase.kind));
  if (phase.kind == PhaseKind::Imitation) {
    label += ":" + std::to_string(phase.movement) + ":" + std::string(mode_name(phase.mode));
  }
  return label;
}

std::string_view code_name(Code code) noexcept { return kCodeNames[static_cast<std::size_t>(code)]; }

std::optional<Code> code_from_name(std::string_view name) noexcept {
  return lookup<Code>(kCodeNames, name);
}

int code_level(Code code) noexcept {
  switch (code) {
    case Code::C3: case Code::C3a: case Code::C3b: return 3;
    case Code::C2: case Code::C2a: case Code::C2b: return 2;
    default: return 1;
  }
}

bool code_legal_for(Code code, PhaseKind phase, ImitationMode mode) noexcept {
  switch (phase) {
    case PhaseKind::Greetings:
    case PhaseKind::Pairing: return code == Code::C3 || code == Code::C2 || code == Code::C1;
    case PhaseKind::Imitation:
      if (mode == ImitationMode::Demonstrate) {
        return code == Code::C3a || code == Code::C2a || code == Code::C1a;
      }
      return code == Code::C3b || code == Code::C2b || code == Code::C1b;
    default: return false;
  }
}

std::string_view observation_name(Observation o) noexcept {
  return kObservationNames[static_cast<std::size_t>(o)];
}

std::optional<Observation> observation_from_name(std::string_view name) noexcept {
  return lookup<Observation>(kObservationNames, name);
}

std::string_view command_name(CommandKind c) noexcept {
  return kCommandNames[static_cast<std::size_t>(c)];
}

std::optional<CommandKind> command_from_name(std::string_view name) noexcept {
  return lookup<CommandKind>(kCommandNames, name);
}

void validate(const RubricConfig& c) {
  if (c.wait_window_ms <= 0 || c.imitation_window_ms <= 0 || c.mirroring_window_ms <= 0) {
    throw Error(Errc::InvalidConfig, "rubric windows must be positive");
  }
  if (c.movement_count <= 0) throw Error(Errc::InvalidConfig, "movement_count must be positive");
}

}  // namespace imitation::session
