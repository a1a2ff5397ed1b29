#include "imitation/pose/features.hpp"

#include "imitation/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace imitation::pose {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "r_elbow",          "l_elbow",           "r_shoulder_elev", "l_shoulder_elev",
    "torso_incline",    "r_wrist_above_head", "l_wrist_above_head",
    "r_arm_extent",     "l_arm_extent",      "r_wrist_level",   "l_wrist_level",
    "r_wrist_below_hip", "l_wrist_below_hip"};

constexpr std::array<int, kFeatureCount> kOppositeFeature = {1, 0, 3, 2, 4, 6, 5,
                                                             8, 7, 10, 9, 12, 11};

const Point kImageDown(0.0, 1.0);

std::optional<Point> normalized_mid_hip(const NormalizedSkeleton& s) {
  const bool right = s.is_visible(Joint::RHip);
  const bool left = s.is_visible(Joint::LHip);
  if (right && left) return Point(0.5 * (s.point(Joint::RHip) + s.point(Joint::LHip)));
  if (right) return s.point(Joint::RHip);
  if (left) return s.point(Joint::LHip);
  return std::nullopt;
}

struct ArmJoints {
  Joint shoulder, elbow, wrist;
  Feature elbow_angle, elevation, above_head, extent, level, below_hip;
};

constexpr ArmJoints kRightArm{Joint::RShoulder, Joint::RElbow, Joint::RWrist,
                              Feature::RElbow,  Feature::RShoulderElev,
                              Feature::RWristAboveHead, Feature::RArmExtent,
                              Feature::RWristLevel, Feature::RWristBelowHip};
constexpr ArmJoints kLeftArm{Joint::LShoulder, Joint::LElbow, Joint::LWrist,
                             Feature::LElbow,  Feature::LShoulderElev,
                             Feature::LWristAboveHead, Feature::LArmExtent,
                             Feature::LWristLevel, Feature::LWristBelowHip};

void arm_features(const NormalizedSkeleton& s, const ArmJoints& arm,
                  const std::optional<Point>& hip, const Point& torso_down,
                  AngleFeatures& out) {
  const bool shoulder = s.is_visible(arm.shoulder);
  const bool elbow = s.is_visible(arm.elbow);
  const bool wrist = s.is_visible(arm.wrist);
  const Point S = s.point(arm.shoulder);
  const Point E = s.point(arm.elbow);
  const Point W = s.point(arm.wrist);

  if (shoulder && elbow && wrist) {
    if (auto a = vector_angle(S - E, W - E)) out.set(arm.elbow_angle, *a);
  }
  if (shoulder && elbow) {
    if (auto a = vector_angle(E - S, torso_down)) out.set(arm.elevation, *a);
  }
  if (wrist && s.is_visible(Joint::Nose)) {
    out.set(arm.above_head, W.y() < s.point(Joint::Nose).y() ? 1.0 : 0.0);
  }
  if (shoulder && wrist) {
    out.set(arm.extent, (W - S).norm());
    out.set(arm.level, W.y() - S.y());
  }
  if (wrist && hip) out.set(arm.below_hip, W.y() - hip->y());
}

}  // namespace

std::string_view feature_name(Feature f) noexcept { return kFeatureNames[index(f)]; }

std::optional<Feature> feature_from_name(std::string_view name) noexcept {
  const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
  if (it == kFeatureNames.end()) return std::nullopt;
  return static_cast<Feature>(it - kFeatureNames.begin());
}

Feature opposite(Feature f) noexcept { return static_cast<Feature>(kOppositeFeature[index(f)]); }

std::optional<double> vector_angle(const Point& a, const Point& b) noexcept {
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > kMinBoneLength) || !(nb > kMinBoneLength)) return std::nullopt;
  const double cross = a.x() * b.y() - a.y() * b.x();
  const double angle = std::atan2(std::abs(cross), a.dot(b));
  if (!std::isfinite(angle)) return std::nullopt;
  return std::clamp(angle, 0.0, std::numbers::pi);
}

AngleFeatures extract_features(const NormalizedSkeleton& s) {
  AngleFeatures out;
  const auto hip = normalized_mid_hip(s);
  const Point neck = s.point(Joint::Neck);

  // Without a visible hip the torso-down reference degrades to the image vertical.
  Point torso_down = kImageDown;
  if (hip && s.is_visible(Joint::Neck)) {
    const Point torso = *hip - neck;
    const double len = torso.norm();
    if (len > kMinBoneLength) {
      torso_down = torso / len;
      out.torso_len = len;
      if (auto a = vector_angle(torso, kImageDown)) out.set(Feature::TorsoIncline, *a);
    }
  }

  arm_features(s, kRightArm, hip, torso_down, out);
  arm_features(s, kLeftArm, hip, torso_down, out);

  for (int i = 0; i < kFeatureCount; ++i) {
    if (out.valid.test(static_cast<std::size_t>(i)) && !std::isfinite(out.value(i))) {
      out.valid.reset(static_cast<std::size_t>(i));
      out.value(i) = 0.0;
    }
  }
  return out;
}

AngleFeatures swap_sides(const AngleFeatures& features) {
  AngleFeatures out;
  out.torso_len = features.torso_len;
  for (const Feature f : kAllFeatures) {
    const Feature g = opposite(f);
    out.value(index(g)) = features.value(index(f));
    out.valid.set(static_cast<std::size_t>(index(g)), features.is_valid(f));
  }
  return out;
}

std::optional<double> try_similarity(const AngleFeatures& a, const AngleFeatures& b,
                                     int min_shared) noexcept {
  double total = 0.0;
  int shared = 0;
  for (const Feature f : kAllFeatures) {
    if (!is_angle(f) && !is_boolean(f)) continue;
    if (!a.is_valid(f) || !b.is_valid(f)) continue;
    if (is_boolean(f)) {
      total += (a[f] != b[f]) ? std::numbers::pi : 0.0;
    } else {
      total += std::abs(a[f] - b[f]);
    }
    ++shared;
  }
  if (shared < std::max(min_shared, 1)) return std::nullopt;
  const double mean = total / shared;
  return std::clamp(1.0 - mean / std::numbers::pi, 0.0, 1.0);
}

double similarity(const AngleFeatures& a, const AngleFeatures& b, int min_shared) {
  if (auto s = try_similarity(a, b, min_shared)) return *s;
  throw Error(Errc::Incomparable, "fewer than " + std::to_string(min_shared) +
                                      " features are valid in both poses");
}

}  // namespace imitation::pose
