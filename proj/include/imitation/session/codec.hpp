#pragma once

#include "imitation/session/engine.hpp"

#include <json.hpp>

namespace imitation::session {

// JSON forms shared by the session log, the report and the console protocol.
// Decoders throw Error(MalformedJson) on shape or enum-name errors.

nlohmann::json to_json(const gesture::MatchResult& r);
gesture::MatchResult match_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const gesture::MotionStats& s);
gesture::MotionStats motion_stats_from_json(const nlohmann::json& j);

// {"type": "observation", "kind": "Smile"}
// {"type": "gesture_matched" | "gesture_failed", "movement": 0, "result": {...}}
// {"type": "activity_change", "stats": {...}}
// {"type": "command", "kind": "AssignRole", "track": 2, "role": "participant"}
// {"type": "tick"}
nlohmann::json to_json(const Payload& p);
Payload payload_from_json(const nlohmann::json& j);

Command command_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Command& c);

// {"seq": 1, "t_ms": 0, "phase": "greetings", "payload": {...}}
nlohmann::json to_json(const StampedEvent& e);
StampedEvent stamped_event_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Phase& p);
Phase phase_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PhaseOutcome& o);
PhaseOutcome outcome_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RubricConfig& c);
// Missing keys keep their defaults; the result is validated.
RubricConfig rubric_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EngineOutput& o);

scene::Role role_from_name(std::string_view name);

}  // namespace imitation::session
