#pragma once

#include "imitation/pose/skeleton.hpp"

#include <array>
#include <span>
#include <string_view>

namespace imitation::scene {

enum class Limb { Head, Torso, LArm, RArm, LLeg, RLeg };
inline constexpr std::array<Limb, 6> kAllLimbs = {Limb::Head, Limb::Torso, Limb::LArm,
                                                  Limb::RArm, Limb::LLeg,  Limb::RLeg};

std::string_view limb_name(Limb limb) noexcept;
bool limb_from_name(std::string_view name, Limb& out) noexcept;
Limb opposite(Limb limb) noexcept;

// Joints that make up a limb, as used by the visibility report below.
std::span<const pose::Joint> limb_joints(Limb limb) noexcept;

// Head = nose + both eyes; torso = neck, shoulders and hips; arms and legs are
// their three-joint chains. A limb is visible iff all its joints are.
struct VisibilityReport {
  bool head = false;
  bool torso = false;
  bool l_arm = false;
  bool r_arm = false;
  bool l_leg = false;
  bool r_leg = false;
  double coverage = 0.0;  // visible joints / 18

  bool limb(Limb l) const;
};

VisibilityReport visibility(const pose::Skeleton& skeleton,
                            double conf_min = pose::kDefaultConfMin);
VisibilityReport visibility(const pose::VisibilityMask& mask);

struct FilterConfig {
  double min_height_ratio = 0.30;
  double min_coverage = 0.25;
  double conf_min = pose::kDefaultConfMin;
};

// Drops skeletons whose joint coverage is below min_coverage, then those whose
// bounding-box height is below min_height_ratio times the tallest remaining
// skeleton. A lone skeleton is only subject to the coverage rule.
pose::Frame reject_false_positives(const pose::Frame& frame, const FilterConfig& config = {});

}  // namespace imitation::scene
