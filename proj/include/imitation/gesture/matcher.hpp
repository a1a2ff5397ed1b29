#pragma once

#include "imitation/gesture/template.hpp"
#include "imitation/pose/features.hpp"
#include "imitation/pose/normalize.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imitation::gesture {

// One participant observation on the matcher's timeline. A frame where the
// participant is absent or cannot be normalized carries no skeleton and an
// all-invalid feature set.
struct PoseSample {
  std::int64_t timestamp_ms = 0;
  std::optional<pose::NormalizedSkeleton> skeleton;
  pose::AngleFeatures features;

  pose::VisibilityMask visible() const {
    return skeleton ? skeleton->visible : pose::VisibilityMask{};
  }
};

PoseSample make_sample(std::int64_t timestamp_ms, const pose::Skeleton& skeleton,
                       double conf_min = pose::kDefaultConfMin);
PoseSample absent_sample(std::int64_t timestamp_ms);

enum class MatchStatus { Success, AttemptFailed, NoAttempt, Unscoreable };
enum class Chirality { Direct, Mirrored };

std::string_view status_name(MatchStatus s) noexcept;
std::string_view chirality_name(Chirality c) noexcept;
std::optional<MatchStatus> status_from_name(std::string_view name) noexcept;
std::optional<Chirality> chirality_from_name(std::string_view name) noexcept;

struct MatchConfig {
  double attempt_energy_min = 0.02;  // normalized units per frame at reference_fps
  double reference_fps = 15.0;
  double unscoreable_fraction = 0.5;
  std::optional<double> arm_length;  // calibrated, torso units
};

struct MatchResult {
  MatchStatus status = MatchStatus::NoAttempt;
  Chirality chirality = Chirality::Direct;
  std::vector<std::optional<std::int64_t>> keyframe_times;  // completion time per keyframe
  std::vector<double> best_similarity;                      // per keyframe, 0 when never comparable
  int keyframes_matched = 0;
  double energy = 0.0;                 // rate-normalized motion energy over the window
  double unscoreable_fraction = 0.0;  // frames with a required limb hidden

  bool operator==(const MatchResult&) const = default;
};

// Sequential keyframe automaton run on both chiralities; reports the one that
// progressed furthest (ties go to Direct). Throws Error(EmptyStream) for an
// empty stream and Error(StreamError) if timestamps are not strictly increasing.
MatchResult match_gesture(std::span<const PoseSample> stream, const GestureTemplate& t,
                          const MatchConfig& config = {});

// Mean L1 displacement of joints visible in consecutive samples, scaled to a
// frame interval of 1000/reference_fps ms. Zero with fewer than two skeletons.
double attempt_energy(std::span<const PoseSample> stream, double reference_fps = 15.0);

// Chirality-swapped joint-angle targets for a robot or display facing the
// participant. Invalid source angles are omitted.
struct PoseCommand {
  std::map<std::string, double> targets;  // feature name -> radians
};

PoseCommand mirror_pose_command(const pose::NormalizedSkeleton& participant);
// Throws Error(MissingAnchor) when the skeleton cannot be normalized.
PoseCommand mirror_pose_command(const pose::Skeleton& participant,
                                double conf_min = pose::kDefaultConfMin);

// Arm length in torso units averaged over samples with both arms visible,
// intended for a T-pose calibration clip.
std::optional<double> calibrate_arm_length(std::span<const PoseSample> tpose);

}  // namespace imitation::gesture
