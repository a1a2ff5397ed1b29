#include "imitation/gesture/template.hpp"

#include "imitation/error.hpp"
#include "imitation/pose/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace imitation::gesture {

using pose::Feature;
using scene::Limb;

namespace {

constexpr double kPi = std::numbers::pi;

Constraint near(Feature f, double target, double tol) {
  return {f, ConstraintKind::Near, target, tol};
}
Constraint at_least(Feature f, double v) { return {f, ConstraintKind::AtLeast, v, 0.0}; }
Constraint at_most(Feature f, double v) { return {f, ConstraintKind::AtMost, v, 0.0}; }
Constraint is_true(Feature f) { return {f, ConstraintKind::IsTrue, 1.0, 0.0}; }

bool is_extent(Feature f) { return f == Feature::RArmExtent || f == Feature::LArmExtent; }

pose::ArmPose straight(double swing, double depth = 0.0) { return {swing, kPi, depth}; }

}  // namespace

std::string_view constraint_kind_name(ConstraintKind kind) noexcept {
  switch (kind) {
    case ConstraintKind::Near: return "near";
    case ConstraintKind::AtLeast: return "at_least";
    case ConstraintKind::AtMost: return "at_most";
    case ConstraintKind::IsTrue: return "is_true";
    case ConstraintKind::IsFalse: return "is_false";
  }
  return "near";
}

bool satisfied(const Constraint& c, const pose::AngleFeatures& f, double extent_scale) {
  if (!f.is_valid(c.feature)) return false;
  const double v = f[c.feature];
  const double scale = is_extent(c.feature) ? extent_scale : 1.0;
  switch (c.kind) {
    case ConstraintKind::Near: return std::abs(v - c.target) <= c.tolerance;
    case ConstraintKind::AtLeast: return v >= c.target * scale;
    case ConstraintKind::AtMost: return v <= c.target * scale;
    case ConstraintKind::IsTrue: return v != 0.0;
    case ConstraintKind::IsFalse: return v == 0.0;
  }
  return false;
}

std::vector<GestureTemplate> builtin_templates(const TemplateDefaults& d) {
  const double tol = d.angle_tolerance;
  std::vector<GestureTemplate> out;

  {
    GestureTemplate t{std::string(kRaiseArmsSky), {}, d.timeout_ms};
    KeyframeSpec up;
    up.constraints = {is_true(Feature::RWristAboveHead), is_true(Feature::LWristAboveHead),
                      near(Feature::RElbow, kPi, tol),   near(Feature::LElbow, kPi, tol),
                      near(Feature::RShoulderElev, kPi, tol),
                      near(Feature::LShoulderElev, kPi, tol)};
    up.hold_ms = d.hold_ms;
    up.required_limbs = {Limb::RArm, Limb::LArm};
    up.exemplar = pose::BodyPose{straight(kPi), straight(kPi), 0.0};
    t.keyframes.push_back(std::move(up));
    out.push_back(std::move(t));
  }
  {
    GestureTemplate t{std::string(kArmsSideBendForward), {}, d.timeout_ms};
    KeyframeSpec side;
    side.constraints = {near(Feature::RElbow, kPi, tol), near(Feature::LElbow, kPi, tol),
                        near(Feature::RShoulderElev, kPi / 2, tol),
                        near(Feature::LShoulderElev, kPi / 2, tol)};
    side.hold_ms = d.hold_ms;
    side.required_limbs = {Limb::RArm, Limb::LArm};
    side.exemplar = pose::BodyPose{straight(kPi / 2), straight(kPi / 2), 0.0};
    KeyframeSpec bend;
    bend.constraints = {at_least(Feature::TorsoIncline, d.bend_threshold)};
    bend.hold_ms = d.hold_ms;
    bend.required_limbs = {Limb::Torso};
    bend.exemplar = pose::BodyPose{straight(kPi / 2), straight(kPi / 2), d.bend_threshold + 0.2};
    t.keyframes.push_back(std::move(side));
    t.keyframes.push_back(std::move(bend));
    out.push_back(std::move(t));
  }
  {
    GestureTemplate t{std::string(kArmsForwardBendToes), {}, d.timeout_ms};
    // Arms pointing at the camera, slightly below horizontal: the 2D arm
    // collapses toward the shoulder.
    const double toward_camera = kPi / 2 - 0.2;
    KeyframeSpec forward;
    forward.constraints = {at_most(Feature::RArmExtent, d.forward_extent_fraction),
                           at_most(Feature::LArmExtent, d.forward_extent_fraction),
                           near(Feature::RWristLevel, 0.0, d.wrist_level_tolerance),
                           near(Feature::LWristLevel, 0.0, d.wrist_level_tolerance)};
    forward.hold_ms = d.hold_ms;
    forward.required_limbs = {Limb::RArm, Limb::LArm};
    forward.exemplar = pose::BodyPose{straight(0.0, toward_camera), straight(0.0, toward_camera), 0.0};
    // Deep lean with the arms hanging toward the floor.
    const double lean = d.deep_bend_threshold + 0.3;
    KeyframeSpec toes;
    toes.constraints = {at_least(Feature::TorsoIncline, d.deep_bend_threshold),
                        at_least(Feature::RWristBelowHip, d.wrist_below_hip),
                        at_least(Feature::LWristBelowHip, d.wrist_below_hip)};
    toes.hold_ms = d.hold_ms;
    toes.required_limbs = {Limb::Torso, Limb::RArm, Limb::LArm};
    toes.exemplar = pose::BodyPose{straight(-lean), straight(lean), lean};
    t.keyframes.push_back(std::move(forward));
    t.keyframes.push_back(std::move(toes));
    out.push_back(std::move(t));
  }
  return out;
}

void validate(const GestureTemplate& t) {
  if (t.name.empty()) throw Error(Errc::InvalidTemplate, "template without a name");
  if (t.keyframes.empty()) throw Error(Errc::InvalidTemplate, t.name + ": no keyframes");
  if (t.timeout_ms <= 0) throw Error(Errc::InvalidTemplate, t.name + ": timeout must be positive");
  for (std::size_t k = 0; k < t.keyframes.size(); ++k) {
    const auto& kf = t.keyframes[k];
    const std::string where = t.name + " keyframe " + std::to_string(k);
    if (kf.hold_ms < 0) throw Error(Errc::InvalidTemplate, where + ": negative hold");
    for (const auto& c : kf.constraints) {
      if (c.kind == ConstraintKind::Near && !(c.tolerance > 0.0)) {
        throw Error(Errc::InvalidTemplate, where + ": tolerance must be positive");
      }
      if (!std::isfinite(c.target)) throw Error(Errc::InvalidTemplate, where + ": non-finite target");
    }
  }
}

GestureTemplate mirrored(const GestureTemplate& t) {
  GestureTemplate out = t;
  for (auto& kf : out.keyframes) {
    for (auto& c : kf.constraints) c.feature = pose::opposite(c.feature);
    for (auto& l : kf.required_limbs) l = scene::opposite(l);
    if (kf.exemplar) {
      std::swap(kf.exemplar->right, kf.exemplar->left);
      kf.exemplar->bend = -kf.exemplar->bend;
    }
  }
  return out;
}

const GestureTemplate& find_template(std::span<const GestureTemplate> templates,
                                     std::string_view name) {
  const auto it = std::find_if(templates.begin(), templates.end(),
                               [&](const GestureTemplate& t) { return t.name == name; });
  if (it == templates.end()) throw Error(Errc::UnknownGesture, std::string(name));
  return *it;
}

pose::AngleFeatures reference_features(const KeyframeSpec& keyframe) {
  if (keyframe.exemplar) {
    if (const auto n = pose::try_normalize(pose::render(*keyframe.exemplar))) {
      return pose::extract_features(*n);
    }
  }
  pose::AngleFeatures f;
  for (const auto& c : keyframe.constraints) {
    if (!pose::is_angle(c.feature) && !pose::is_boolean(c.feature)) continue;
    switch (c.kind) {
      case ConstraintKind::Near:
      case ConstraintKind::AtLeast:
      case ConstraintKind::AtMost: f.set(c.feature, c.target); break;
      case ConstraintKind::IsTrue: f.set(c.feature, 1.0); break;
      case ConstraintKind::IsFalse: f.set(c.feature, 0.0); break;
    }
  }
  return f;
}

}  // namespace imitation::gesture
