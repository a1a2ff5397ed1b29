#pragma once

#include "imitation/gesture/matcher.hpp"
#include "imitation/scene/filter.hpp"
#include "imitation/scene/tracker.hpp"
#include "imitation/session/types.hpp"
#include "imitation/store/registry.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace imitation::io {

enum class Actor { Participant, Model };
std::string_view actor_name(Actor a) noexcept;

// Play a gesture's keyframe exemplars: ease in over 800/speed ms, hold each
// keyframe 1000/speed ms, ease back to neutral. `limbs` restricts which body
// parts follow the exemplar (arms, and torso for the bend); empty means all.
struct Perform {
  std::string gesture;
  gesture::Chirality chirality = gesture::Chirality::Direct;
  double sigma = 0.0;  // coordinate jitter, torso units
  double speed = 1.0;
  std::vector<scene::Limb> limbs;
};

// Return to the neutral stance. A non-zero bounce adds a vertical whole-body
// oscillation (running on the spot, rocking).
struct Idle {
  double sigma = 0.003;
  double bounce_hz = 0.0;
  double bounce_amplitude = 0.0;  // torso units
};

struct Hide {
  std::vector<scene::Limb> limbs;
};
struct Show {
  std::vector<scene::Limb> limbs;
};
struct Observe {
  session::Observation kind = session::Observation::Smile;
};
struct IssueCommand {
  session::Command command;
};
// A spurious miniature detection, height_ratio times the participant's
// height, centred at (x, y) pixels. Lasts duration_ms, or forever.
struct FalsePositive {
  double height_ratio = 0.075;
  double x = 560.0;
  double y = 80.0;
  std::optional<std::int64_t> duration_ms;
};

using Action = std::variant<Perform, Idle, Hide, Show, Observe, IssueCommand, FalsePositive>;

struct ScriptEntry {
  std::int64_t at_ms = 0;
  Actor actor = Actor::Participant;
  Action action;
};

struct SceneLayout {
  scene::Side model_on = scene::Side::Left;
  double participant_x = 420.0;  // mid-hip x, pixels
  double model_x = 220.0;
  double mid_hip_y = 300.0;
  double participant_torso_px = 110.0;
  double model_torso_px = 125.0;
};

struct ScenarioScript {
  std::string name;
  store::ParticipantProfile participant;
  double fps = 15.0;
  std::uint64_t seed = 1;
  std::int64_t duration_ms = 0;
  SceneLayout scene;
  std::vector<ScriptEntry> timeline;
};

// Throws Error(InvalidScript) for schema violations, decreasing at_ms,
// non-positive fps or duration. Unknown gesture names are not checked here;
// simulate() raises Error(UnknownGesture).
ScenarioScript scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioScript& script);
ScenarioScript load_scenario(const std::filesystem::path& path);

}  // namespace imitation::io
