#include "imitation/scene/tracker.hpp"

#include "imitation/error.hpp"
#include "imitation/pose/normalize.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace imitation::scene {

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::Unassigned: return "unassigned";
    case Role::Participant: return "participant";
    case Role::Model: return "model";
  }
  return "unassigned";
}

double TrackedPerson::mean_neck_x() const {
  if (neck_trace.empty()) return anchor_point(last_skeleton).x();
  double sum = 0.0;
  for (const auto& p : neck_trace) sum += p.x();
  return sum / static_cast<double>(neck_trace.size());
}

pose::Point anchor_point(const pose::Skeleton& s, double conf_min) {
  if (s.visible(pose::Joint::Neck, conf_min)) return s.point(pose::Joint::Neck);
  pose::Point sum = pose::Point::Zero();
  int n = 0;
  for (int i = 0; i < pose::kJointCount; ++i) {
    if (s.confidence(i) < conf_min) continue;
    sum += s.xy.row(i).transpose();
    ++n;
  }
  return n > 0 ? pose::Point(sum / n) : pose::Point::Zero();
}

double body_scale(const pose::Skeleton& s, double conf_min) {
  if (const auto n = pose::try_normalize(s, conf_min)) return n->scale;
  return std::max(pose::bounding_box(s, conf_min).height() / 3.0, 1.0);
}

TrackerState track(TrackerState state, const pose::Frame& frame, const TrackConfig& config) {
  struct Candidate {
    double distance;
    std::size_t track;
    std::size_t skeleton;
  };

  auto& tracks = state.tracks;
  std::vector<pose::Point> anchors;
  anchors.reserve(frame.skeletons.size());
  for (const auto& s : frame.skeletons) anchors.push_back(anchor_point(s, config.conf_min));

  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const auto& person = tracks[t];
    const pose::Point last = anchor_point(person.last_skeleton, config.conf_min);
    const double scale = body_scale(person.last_skeleton, config.conf_min);
    for (std::size_t k = 0; k < anchors.size(); ++k) {
      const double d = (anchors[k] - last).norm() / scale;
      if (d <= config.max_jump) candidates.push_back({d, t, k});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, tracks[a.track].track_id, a.skeleton) <
           std::tie(b.distance, tracks[b.track].track_id, b.skeleton);
  });

  std::vector<bool> track_taken(tracks.size(), false);
  std::vector<bool> skeleton_taken(anchors.size(), false);
  auto update = [&](TrackedPerson& person, std::size_t k) {
    person.last_skeleton = frame.skeletons[k];
    person.last_seen = frame.timestamp_ms;
    person.neck_trace.push_back(anchors[k]);
    while (person.neck_trace.size() > config.trace_length) person.neck_trace.pop_front();
  };

  for (const auto& c : candidates) {
    if (track_taken[c.track] || skeleton_taken[c.skeleton]) continue;
    track_taken[c.track] = true;
    skeleton_taken[c.skeleton] = true;
    update(tracks[c.track], c.skeleton);
  }
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    if (skeleton_taken[k]) continue;
    TrackedPerson person;
    person.track_id = state.next_id++;
    update(person, k);
    tracks.push_back(std::move(person));
  }

  std::erase_if(tracks, [&](const TrackedPerson& p) {
    return frame.timestamp_ms - p.last_seen > config.track_ttl_ms;
  });
  return state;
}

bool roles_settled(const std::vector<TrackedPerson>& tracks) {
  return find_role(tracks, Role::Participant) != nullptr && find_role(tracks, Role::Model) != nullptr;
}

const TrackedPerson* find_role(const std::vector<TrackedPerson>& tracks, Role role) {
  const auto it = std::find_if(tracks.begin(), tracks.end(),
                               [role](const TrackedPerson& p) { return p.role == role; });
  return it == tracks.end() ? nullptr : &*it;
}

namespace {

Role complement(Role role) {
  return role == Role::Participant ? Role::Model : Role::Participant;
}

struct AssignRoles {
  std::vector<TrackedPerson>& tracks;

  void operator()(const BySide& policy) const {
    if (roles_settled(tracks)) return;
    if (tracks.size() != 2) {
      throw Error(Errc::AmbiguousRoles, "side policy needs exactly two tracks, found " +
                                            std::to_string(tracks.size()));
    }
    auto& a = tracks[0];
    auto& b = tracks[1];
    if (a.role != Role::Unassigned && b.role != a.role) {
      b.role = complement(a.role);
      return;
    }
    if (b.role != Role::Unassigned && a.role != b.role) {
      a.role = complement(b.role);
      return;
    }
    const double ax = a.mean_neck_x();
    const double bx = b.mean_neck_x();
    const bool a_left = ax < bx || (ax == bx && a.track_id < b.track_id);
    auto& left = a_left ? a : b;
    auto& right = a_left ? b : a;
    left.role = policy.model_on == Side::Left ? Role::Model : Role::Participant;
    right.role = complement(left.role);
  }

  void operator()(const ByOperator& policy) const {
    const auto it = std::find_if(tracks.begin(), tracks.end(), [&](const TrackedPerson& p) {
      return p.track_id == policy.track_id;
    });
    if (it == tracks.end()) {
      throw Error(Errc::UnknownTrack, "no live track with id " + std::to_string(policy.track_id));
    }
    for (auto& p : tracks) {
      if (p.role == policy.role) p.role = Role::Unassigned;
    }
    it->role = policy.role;
    if (policy.role != Role::Unassigned && tracks.size() == 2) {
      auto& other = (&*it == &tracks[0]) ? tracks[1] : tracks[0];
      if (other.role == Role::Unassigned || other.role == policy.role) {
        other.role = complement(policy.role);
      }
    }
  }
};

}  // namespace

std::vector<TrackedPerson> assign_roles(std::vector<TrackedPerson> tracks, const RolePolicy& policy) {
  std::visit(AssignRoles{tracks}, policy);
  return tracks;
}

}  // namespace imitation::scene
