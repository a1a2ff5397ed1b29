#pragma once

#include <Eigen/Core>

#include <array>
#include <bitset>
#include <cstdint>
#include <string_view>
#include <vector>

namespace imitation::pose {

// COCO-18 keypoint layout, as emitted by OpenPose's COCO model.
enum class Joint : int {
  Nose = 0,
  Neck,       // 1
  RShoulder,  // 2
  RElbow,     // 3
  RWrist,     // 4
  LShoulder,  // 5
  LElbow,     // 6
  LWrist,     // 7
  RHip,       // 8
  RKnee,      // 9
  RAnkle,     // 10
  LHip,       // 11
  LKnee,      // 12
  LAnkle,     // 13
  REye,       // 14
  LEye,       // 15
  REar,       // 16
  LEar        // 17
};

inline constexpr int kJointCount = 18;

// Joints below this confidence are invisible; their coordinates carry no meaning.
inline constexpr double kDefaultConfMin = 0.10;

constexpr int index(Joint j) noexcept { return static_cast<int>(j); }
std::string_view joint_name(Joint j) noexcept;

// Left/right counterpart of a joint (Nose and Neck map to themselves).
Joint opposite(Joint j) noexcept;

using Point = Eigen::Vector2d;
// Row i holds (x, y) of joint i in image pixels: origin top-left, y grows downward.
using Coords = Eigen::Matrix<double, kJointCount, 2>;
using Confidence = Eigen::Array<double, kJointCount, 1>;
using VisibilityMask = std::bitset<kJointCount>;

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

// One person's 18 keypoints. Every slot is present; invisibility is a
// confidence below conf_min, never a missing entry.
struct Skeleton {
  Coords xy = Coords::Zero();
  Confidence confidence = Confidence::Zero();

  Point point(Joint j) const { return xy.row(index(j)).transpose(); }
  Keypoint keypoint(Joint j) const;
  void set(Joint j, double x, double y, double confidence);
  void set(Joint j, const Point& p, double confidence) { set(j, p.x(), p.y(), confidence); }

  bool visible(Joint j, double conf_min = kDefaultConfMin) const {
    return confidence(index(j)) >= conf_min;
  }
  VisibilityMask visibility(double conf_min = kDefaultConfMin) const;
  int visible_count(double conf_min = kDefaultConfMin) const {
    return static_cast<int>(visibility(conf_min).count());
  }

  bool operator==(const Skeleton& other) const {
    return xy == other.xy && (confidence == other.confidence).all();
  }
};

enum class FrameSource { Replay, Live, Simulated };

std::string_view to_string(FrameSource source) noexcept;

struct Frame {
  std::int64_t timestamp_ms = 0;  // since session start
  std::vector<Skeleton> skeletons;
  FrameSource source = FrameSource::Replay;
};

// Axis-aligned extent of the visible joints, {min, max}; empty skeletons give zeros.
struct BoundingBox {
  Point min = Point::Zero();
  Point max = Point::Zero();
  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
};

BoundingBox bounding_box(const Skeleton& s, double conf_min = kDefaultConfMin);

}  // namespace imitation::pose
