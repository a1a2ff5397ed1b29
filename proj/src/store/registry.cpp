#include "imitation/store/registry.hpp"

#include "imitation/error.hpp"

#include <cmath>

namespace imitation::store {

void validate(const ParticipantProfile& p) {
  if (p.id.empty()) throw Error(Errc::InvalidConfig, "participant id is empty");
  if (!(p.biological_age > 0.0) || !(p.nd_age > 0.0)) {
    throw Error(Errc::InvalidConfig, p.id + ": ages must be positive");
  }
  if (!(p.cars_score > 0.0)) throw Error(Errc::InvalidConfig, p.id + ": CARS score must be positive");
}

void ParticipantRegistry::register_participant(ParticipantProfile profile) {
  validate(profile);
  if (profiles_.contains(profile.id)) throw Error(Errc::DuplicateId, profile.id);
  auto id = profile.id;
  profiles_.emplace(std::move(id), std::move(profile));
}

std::optional<ParticipantProfile> ParticipantRegistry::find(const std::string& id) const {
  const auto it = profiles_.find(id);
  if (it == profiles_.end()) return std::nullopt;
  return it->second;
}

const ParticipantProfile& ParticipantRegistry::at(const std::string& id) const {
  const auto it = profiles_.find(id);
  if (it == profiles_.end()) throw Error(Errc::UnknownParticipant, id);
  return it->second;
}

std::vector<ParticipantProfile> ParticipantRegistry::all() const {
  std::vector<ParticipantProfile> out;
  out.reserve(profiles_.size());
  for (const auto& [id, p] : profiles_) out.push_back(p);
  return out;
}

}  // namespace imitation::store
