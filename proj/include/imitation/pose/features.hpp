#pragma once

#include "imitation/pose/normalize.hpp"

#include <Eigen/Core>

#include <array>
#include <bitset>
#include <optional>
#include <string_view>

namespace imitation::pose {

// Pose features read off a normalized skeleton.
//
// Angles (radians, always in [0, pi]):
//   RElbow/LElbow            shoulder-elbow-wrist interior angle
//   RShoulderElev/LShoulderElev  upper arm vs. torso-down vector
//   TorsoIncline             neck->mid-hip vs. image vertical
// Booleans (stored as 0 or 1):
//   RWristAboveHead/LWristAboveHead  wrist.y < nose.y
// Distances (normalized units):
//   RArmExtent/LArmExtent    |wrist - shoulder|
//   RWristLevel/LWristLevel  wrist.y - shoulder.y (positive = below the shoulder)
//   RWristBelowHip/LWristBelowHip  wrist.y - mid_hip.y
enum class Feature : int {
  RElbow = 0,
  LElbow,
  RShoulderElev,
  LShoulderElev,
  TorsoIncline,
  RWristAboveHead,
  LWristAboveHead,
  RArmExtent,
  LArmExtent,
  RWristLevel,
  LWristLevel,
  RWristBelowHip,
  LWristBelowHip,
};

inline constexpr int kFeatureCount = 13;
inline constexpr int kAngleFeatureCount = 5;  // the first five are angles

constexpr int index(Feature f) noexcept { return static_cast<int>(f); }
constexpr bool is_angle(Feature f) noexcept { return index(f) < kAngleFeatureCount; }
constexpr bool is_boolean(Feature f) noexcept {
  return f == Feature::RWristAboveHead || f == Feature::LWristAboveHead;
}

std::string_view feature_name(Feature f) noexcept;
std::optional<Feature> feature_from_name(std::string_view name) noexcept;
Feature opposite(Feature f) noexcept;

inline constexpr std::array<Feature, kFeatureCount> kAllFeatures = {
    Feature::RElbow,          Feature::LElbow,          Feature::RShoulderElev,
    Feature::LShoulderElev,   Feature::TorsoIncline,    Feature::RWristAboveHead,
    Feature::LWristAboveHead, Feature::RArmExtent,      Feature::LArmExtent,
    Feature::RWristLevel,     Feature::LWristLevel,     Feature::RWristBelowHip,
    Feature::LWristBelowHip};

using FeatureVector = Eigen::Array<double, kFeatureCount, 1>;

struct AngleFeatures {
  FeatureVector value = FeatureVector::Zero();
  std::bitset<kFeatureCount> valid;
  std::optional<double> torso_len;  // neck to mid-hip, normalized units

  bool is_valid(Feature f) const { return valid.test(static_cast<std::size_t>(index(f))); }
  double operator[](Feature f) const { return value(index(f)); }
  std::optional<double> get(Feature f) const {
    return is_valid(f) ? std::optional<double>(value(index(f))) : std::nullopt;
  }
  void set(Feature f, double v) {
    value(index(f)) = v;
    valid.set(static_cast<std::size_t>(index(f)));
  }
};

// Bones shorter than this (normalized units) are degenerate; dependent features are invalid.
inline constexpr double kMinBoneLength = 1e-9;

AngleFeatures extract_features(const NormalizedSkeleton& skeleton);

// Rename every right-side feature to its left-side counterpart and vice versa.
AngleFeatures swap_sides(const AngleFeatures& features);

// Interior angle between two vectors in [0, pi]; nullopt if either is degenerate.
std::optional<double> vector_angle(const Point& a, const Point& b) noexcept;

inline constexpr int kDefaultMinSharedAngles = 2;

// 1 - mean(|delta|)/pi over the angle and boolean features valid in both
// inputs. Booleans contribute 0 or pi. Throws Error(Incomparable) when fewer
// than min_shared features are shared.
double similarity(const AngleFeatures& a, const AngleFeatures& b,
                  int min_shared = kDefaultMinSharedAngles);
std::optional<double> try_similarity(const AngleFeatures& a, const AngleFeatures& b,
                                     int min_shared = kDefaultMinSharedAngles) noexcept;

}  // namespace imitation::pose
