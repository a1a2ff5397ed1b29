#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace imitation::store {

// Participant metadata, stored verbatim. CARS is never recomputed.
struct ParticipantProfile {
  std::string id;
  double biological_age = 0.0;  // years
  double nd_age = 0.0;          // neurodevelopmental age, years, may be fractional
  double cars_score = 0.0;
  bool verbal = false;
  std::string notes;

  bool operator==(const ParticipantProfile&) const = default;
};

// Throws Error(InvalidConfig) for an empty id, non-positive ages or CARS score.
void validate(const ParticipantProfile& profile);

class ParticipantRegistry {
 public:
  // Throws Error(DuplicateId) if the id is taken.
  void register_participant(ParticipantProfile profile);

  bool contains(const std::string& id) const { return profiles_.contains(id); }
  std::optional<ParticipantProfile> find(const std::string& id) const;
  // Throws Error(UnknownParticipant).
  const ParticipantProfile& at(const std::string& id) const;
  std::vector<ParticipantProfile> all() const;

 private:
  std::map<std::string, ParticipantProfile> profiles_;
};

}  // namespace imitation::store
