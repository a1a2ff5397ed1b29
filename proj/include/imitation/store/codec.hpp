#pragma once

#include "imitation/store/registry.hpp"

#include <json.hpp>

namespace imitation::store {

// {"id": "I", "biological_age": 12, "nd_age": 0.5, "cars_score": 47,
//  "verbal": false, "notes": ""}
// Decoding validates; shape errors raise Error(MalformedJson).
nlohmann::json to_json(const ParticipantProfile& p);
ParticipantProfile profile_from_json(const nlohmann::json& j);

}  // namespace imitation::store
