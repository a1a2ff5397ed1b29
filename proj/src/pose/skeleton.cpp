#include "imitation/pose/skeleton.hpp"

#include <algorithm>

namespace imitation::pose {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "Nose", "Neck",  "RShoulder", "RElbow", "RWrist", "LShoulder",
    "LElbow", "LWrist", "RHip",   "RKnee",  "RAnkle", "LHip",
    "LKnee", "LAnkle", "REye",    "LEye",   "REar",   "LEar"};

constexpr std::array<int, kJointCount> kOpposite = {0, 1, 5, 6, 7, 2, 3, 4, 11,
                                                    12, 13, 8, 9, 10, 15, 14, 17, 16};

}  // namespace

std::string_view joint_name(Joint j) noexcept { return kJointNames[index(j)]; }

Joint opposite(Joint j) noexcept { return static_cast<Joint>(kOpposite[index(j)]); }

Keypoint Skeleton::keypoint(Joint j) const {
  const int i = index(j);
  return {xy(i, 0), xy(i, 1), confidence(i)};
}

void Skeleton::set(Joint j, double x, double y, double c) {
  const int i = index(j);
  xy(i, 0) = x;
  xy(i, 1) = y;
  confidence(i) = c;
}

VisibilityMask Skeleton::visibility(double conf_min) const {
  VisibilityMask mask;
  for (int i = 0; i < kJointCount; ++i) {
    if (confidence(i) >= conf_min) mask.set(static_cast<std::size_t>(i));
  }
  return mask;
}

std::string_view to_string(FrameSource source) noexcept {
  switch (source) {
    case FrameSource::Replay: return "replay";
    case FrameSource::Live: return "live";
    case FrameSource::Simulated: return "simulated";
  }
  return "replay";
}

BoundingBox bounding_box(const Skeleton& s, double conf_min) {
  BoundingBox box;
  bool any = false;
  for (int i = 0; i < kJointCount; ++i) {
    if (s.confidence(i) < conf_min) continue;
    const Point p = s.xy.row(i).transpose();
    if (!any) {
      box.min = p;
      box.max = p;
      any = true;
    } else {
      box.min = box.min.cwiseMin(p);
      box.max = box.max.cwiseMax(p);
    }
  }
  return box;
}

}  // namespace imitation::pose
