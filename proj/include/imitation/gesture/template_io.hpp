#pragma once

#include "imitation/gesture/template.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace imitation::gesture {

// Declarative template format:
//
//   {"name": "raise_arms_sky", "timeout_ms": 20000,
//    "keyframes": [{"hold_ms": 500, "required_limbs": ["r_arm", "l_arm"],
//                   "constraints": [{"feature": "r_elbow", "kind": "near",
//                                    "target": 3.14159, "tolerance": 0.35},
//                                   {"feature": "r_wrist_above_head", "kind": "is_true"}],
//                   "exemplar": {"bend": 0.0,
//                                "right": {"swing": 3.14159, "elbow": 3.14159, "depth": 0.0},
//                                "left":  {"swing": 3.14159, "elbow": 3.14159, "depth": 0.0}}}]}
//
// Parsing validates the result; malformed documents raise Error(InvalidTemplate).
nlohmann::json to_json(const GestureTemplate& t);
GestureTemplate template_from_json(const nlohmann::json& j);

nlohmann::json to_json(const pose::BodyPose& pose);
pose::BodyPose body_pose_from_json(const nlohmann::json& j);

// Accepts either a single template object or {"templates": [...]}.
std::vector<GestureTemplate> load_templates(const std::filesystem::path& path);

}  // namespace imitation::gesture
