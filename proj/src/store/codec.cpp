#include "imitation/store/codec.hpp"

#include "imitation/error.hpp"

namespace imitation::store {

using nlohmann::json;

json to_json(const ParticipantProfile& p) {
  return {{"id", p.id},
          {"biological_age", p.biological_age},
          {"nd_age", p.nd_age},
          {"cars_score", p.cars_score},
          {"verbal", p.verbal},
          {"notes", p.notes}};
}

ParticipantProfile profile_from_json(const json& j) {
  ParticipantProfile p;
  try {
    p.id = j.at("id").get<std::string>();
    p.biological_age = j.at("biological_age").get<double>();
    p.nd_age = j.at("nd_age").get<double>();
    p.cars_score = j.at("cars_score").get<double>();
    p.verbal = j.value("verbal", false);
    p.notes = j.value("notes", std::string());
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedJson, std::string("participant profile: ") + e.what());
  }
  validate(p);
  return p;
}

}  // namespace imitation::store
