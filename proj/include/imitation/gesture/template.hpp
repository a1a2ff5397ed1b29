#pragma once

#include "imitation/pose/body_model.hpp"
#include "imitation/pose/features.hpp"
#include "imitation/scene/filter.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imitation::gesture {

enum class ConstraintKind {
  Near,     // |v - target| <= tolerance
  AtLeast,  // v >= target
  AtMost,   // v <= target
  IsTrue,   // boolean feature set
  IsFalse,  // boolean feature clear
};

std::string_view constraint_kind_name(ConstraintKind kind) noexcept;

struct Constraint {
  pose::Feature feature = pose::Feature::RElbow;
  ConstraintKind kind = ConstraintKind::Near;
  double target = 0.0;
  double tolerance = 0.35;  // only read by Near

  bool operator==(const Constraint&) const = default;
};

// Arm-extent thresholds (AtMost/AtLeast on *ArmExtent) are multiplied by
// extent_scale, which is the calibrated arm length in torso units (1.0 when
// uncalibrated). An invalid feature never satisfies a constraint.
bool satisfied(const Constraint& c, const pose::AngleFeatures& f, double extent_scale = 1.0);

struct KeyframeSpec {
  std::vector<Constraint> constraints;
  std::int64_t hold_ms = 500;
  std::vector<scene::Limb> required_limbs;
  // Analytic pose that satisfies the keyframe; drives the simulator and the
  // reference features used for per-keyframe similarity.
  std::optional<pose::BodyPose> exemplar;
};

struct GestureTemplate {
  std::string name;
  std::vector<KeyframeSpec> keyframes;
  std::int64_t timeout_ms = 20000;
};

struct TemplateDefaults {
  double angle_tolerance = 0.35;
  std::int64_t hold_ms = 500;
  std::int64_t timeout_ms = 20000;
  double bend_threshold = 0.6;
  double deep_bend_threshold = 0.9;
  double forward_extent_fraction = 0.5;  // of arm length (torso units when uncalibrated)
  double wrist_level_tolerance = 0.35;
  double wrist_below_hip = 0.2;
};

inline constexpr std::string_view kRaiseArmsSky = "raise_arms_sky";
inline constexpr std::string_view kArmsSideBendForward = "arms_side_bend_forward";
inline constexpr std::string_view kArmsForwardBendToes = "arms_forward_bend_toes";

// The three exercise movements, in session order. Legs are never required.
std::vector<GestureTemplate> builtin_templates(const TemplateDefaults& defaults = {});

// Throws Error(InvalidTemplate) on an empty keyframe list, a non-positive Near
// tolerance, a negative hold or a non-positive timeout.
void validate(const GestureTemplate& t);

// Left/right swapped copy: features and limbs renamed, exemplar arms exchanged.
GestureTemplate mirrored(const GestureTemplate& t);

// Throws Error(UnknownGesture).
const GestureTemplate& find_template(std::span<const GestureTemplate> templates,
                                     std::string_view name);

// Features of the keyframe's target pose: rendered from the exemplar when
// present, otherwise assembled from Near/boolean constraint targets.
pose::AngleFeatures reference_features(const KeyframeSpec& keyframe);

}  // namespace imitation::gesture
