#include "imitation/scene/filter.hpp"

#include <algorithm>
#include <array>

namespace imitation::scene {

using pose::Joint;

namespace {

constexpr std::array<Joint, 3> kHead = {Joint::Nose, Joint::REye, Joint::LEye};
constexpr std::array<Joint, 5> kTorso = {Joint::Neck, Joint::RShoulder, Joint::LShoulder,
                                         Joint::RHip, Joint::LHip};
constexpr std::array<Joint, 3> kRArm = {Joint::RShoulder, Joint::RElbow, Joint::RWrist};
constexpr std::array<Joint, 3> kLArm = {Joint::LShoulder, Joint::LElbow, Joint::LWrist};
constexpr std::array<Joint, 3> kRLeg = {Joint::RHip, Joint::RKnee, Joint::RAnkle};
constexpr std::array<Joint, 3> kLLeg = {Joint::LHip, Joint::LKnee, Joint::LAnkle};

bool all_visible(const pose::VisibilityMask& mask, std::span<const Joint> joints) {
  return std::all_of(joints.begin(), joints.end(), [&](Joint j) {
    return mask.test(static_cast<std::size_t>(pose::index(j)));
  });
}

}  // namespace

std::string_view limb_name(Limb limb) noexcept {
  switch (limb) {
    case Limb::Head: return "head";
    case Limb::Torso: return "torso";
    case Limb::LArm: return "l_arm";
    case Limb::RArm: return "r_arm";
    case Limb::LLeg: return "l_leg";
    case Limb::RLeg: return "r_leg";
  }
  return "head";
}

bool limb_from_name(std::string_view name, Limb& out) noexcept {
  for (const Limb l : kAllLimbs) {
    if (limb_name(l) == name) {
      out = l;
      return true;
    }
  }
  return false;
}

Limb opposite(Limb limb) noexcept {
  switch (limb) {
    case Limb::LArm: return Limb::RArm;
    case Limb::RArm: return Limb::LArm;
    case Limb::LLeg: return Limb::RLeg;
    case Limb::RLeg: return Limb::LLeg;
    default: return limb;
  }
}

std::span<const Joint> limb_joints(Limb limb) noexcept {
  switch (limb) {
    case Limb::Head: return kHead;
    case Limb::Torso: return kTorso;
    case Limb::LArm: return kLArm;
    case Limb::RArm: return kRArm;
    case Limb::LLeg: return kLLeg;
    case Limb::RLeg: return kRLeg;
  }
  return kHead;
}

bool VisibilityReport::limb(Limb l) const {
  switch (l) {
    case Limb::Head: return head;
    case Limb::Torso: return torso;
    case Limb::LArm: return l_arm;
    case Limb::RArm: return r_arm;
    case Limb::LLeg: return l_leg;
    case Limb::RLeg: return r_leg;
  }
  return false;
}

VisibilityReport visibility(const pose::Skeleton& skeleton, double conf_min) {
  return visibility(skeleton.visibility(conf_min));
}

VisibilityReport visibility(const pose::VisibilityMask& mask) {
  VisibilityReport r;
  r.head = all_visible(mask, kHead);
  r.torso = all_visible(mask, kTorso);
  r.r_arm = all_visible(mask, kRArm);
  r.l_arm = all_visible(mask, kLArm);
  r.r_leg = all_visible(mask, kRLeg);
  r.l_leg = all_visible(mask, kLLeg);
  r.coverage = static_cast<double>(mask.count()) / pose::kJointCount;
  return r;
}

pose::Frame reject_false_positives(const pose::Frame& frame, const FilterConfig& config) {
  pose::Frame out;
  out.timestamp_ms = frame.timestamp_ms;
  out.source = frame.source;

  std::vector<const pose::Skeleton*> covered;
  for (const auto& s : frame.skeletons) {
    if (visibility(s, config.conf_min).coverage >= config.min_coverage) covered.push_back(&s);
  }
  if (covered.size() <= 1) {
    for (const auto* s : covered) out.skeletons.push_back(*s);
    return out;
  }

  double tallest = 0.0;
  for (const auto* s : covered) {
    tallest = std::max(tallest, pose::bounding_box(*s, config.conf_min).height());
  }
  const double floor = config.min_height_ratio * tallest;
  for (const auto* s : covered) {
    if (pose::bounding_box(*s, config.conf_min).height() >= floor) out.skeletons.push_back(*s);
  }
  return out;
}

}  // namespace imitation::scene
