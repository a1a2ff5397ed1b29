#pragma once

#include "imitation/pose/skeleton.hpp"

#include <cstdint>
#include <deque>
#include <string_view>
#include <variant>
#include <vector>

namespace imitation::scene {

enum class Role { Unassigned, Participant, Model };
std::string_view role_name(Role role) noexcept;

using TrackId = std::uint64_t;

struct TrackedPerson {
  TrackId track_id = 0;
  Role role = Role::Unassigned;
  pose::Skeleton last_skeleton;
  std::int64_t last_seen = 0;
  std::deque<pose::Point> neck_trace;  // most recent last

  double mean_neck_x() const;
};

struct TrackConfig {
  double max_jump = 1.5;  // torso lengths
  std::int64_t track_ttl_ms = 1000;
  std::size_t trace_length = 30;
  double conf_min = pose::kDefaultConfMin;
};

struct TrackerState {
  std::vector<TrackedPerson> tracks;
  TrackId next_id = 1;
};

// Neck position, or the centroid of visible joints when the neck is hidden.
pose::Point anchor_point(const pose::Skeleton& s, double conf_min = pose::kDefaultConfMin);

// Pixels per torso length, falling back to a third of the bounding-box height.
double body_scale(const pose::Skeleton& s, double conf_min = pose::kDefaultConfMin);

// Greedy nearest-neighbour association on anchor position. Pairs are taken in
// increasing normalized distance (ties by track id, then skeleton order); a pair
// is only eligible within max_jump track-scales. Unmatched skeletons open new
// tracks; tracks unseen for longer than the TTL are dropped.
TrackerState track(TrackerState state, const pose::Frame& frame, const TrackConfig& config = {});

enum class Side { Left, Right };

struct BySide {
  Side model_on = Side::Left;
};
struct ByOperator {
  TrackId track_id = 0;
  Role role = Role::Participant;
};
using RolePolicy = std::variant<BySide, ByOperator>;

bool roles_settled(const std::vector<TrackedPerson>& tracks);

// Roles are sticky: an existing participant/model pair is never reshuffled by
// BySide. Throws Error(AmbiguousRoles) when BySide needs to decide and there are
// not exactly two tracks, Error(UnknownTrack) for an operator id not present.
std::vector<TrackedPerson> assign_roles(std::vector<TrackedPerson> tracks, const RolePolicy& policy);

const TrackedPerson* find_role(const std::vector<TrackedPerson>& tracks, Role role);

}  // namespace imitation::scene
