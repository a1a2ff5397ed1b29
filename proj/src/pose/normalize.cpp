#include "imitation/pose/normalize.hpp"

#include "imitation/error.hpp"

namespace imitation::pose {

namespace {

constexpr double kShoulderScaleFactor = 2.0;
constexpr double kMinScale = 1e-9;

template <typename Coordinates, typename Mask>
void swap_sides(Coordinates& xy, Mask& mask) {
  for (int i = 0; i < kJointCount; ++i) {
    const int j = index(opposite(static_cast<Joint>(i)));
    if (j <= i) continue;
    xy.row(i).swap(xy.row(j));
    const bool vi = mask.test(static_cast<std::size_t>(i));
    mask.set(static_cast<std::size_t>(i), mask.test(static_cast<std::size_t>(j)));
    mask.set(static_cast<std::size_t>(j), vi);
  }
}

struct Anchor {
  Point neck;
  double scale;
  ScaleSource source;
};

std::optional<Anchor> find_anchor(const Skeleton& s, double conf_min) {
  if (!s.visible(Joint::Neck, conf_min)) return std::nullopt;
  const Point neck = s.point(Joint::Neck);
  if (const auto hip = mid_hip(s, conf_min)) {
    const double torso = (*hip - neck).norm();
    if (torso > kMinScale) return Anchor{neck, torso, ScaleSource::Hips};
  }
  if (s.visible(Joint::RShoulder, conf_min) && s.visible(Joint::LShoulder, conf_min)) {
    const double width = (s.point(Joint::RShoulder) - s.point(Joint::LShoulder)).norm();
    if (width > kMinScale) return Anchor{neck, kShoulderScaleFactor * width, ScaleSource::Shoulders};
  }
  return std::nullopt;
}

}  // namespace

std::optional<Point> mid_hip(const Skeleton& s, double conf_min) {
  const bool right = s.visible(Joint::RHip, conf_min);
  const bool left = s.visible(Joint::LHip, conf_min);
  if (right && left) return Point(0.5 * (s.point(Joint::RHip) + s.point(Joint::LHip)));
  if (right) return s.point(Joint::RHip);
  if (left) return s.point(Joint::LHip);
  return std::nullopt;
}

std::optional<NormalizedSkeleton> try_normalize(const Skeleton& skeleton,
                                                double conf_min) noexcept {
  const auto anchor = find_anchor(skeleton, conf_min);
  if (!anchor) return std::nullopt;
  NormalizedSkeleton out;
  out.xy = (skeleton.xy.rowwise() - anchor->neck.transpose()) / anchor->scale;
  out.visible = skeleton.visibility(conf_min);
  out.scale_source = anchor->source;
  out.scale = anchor->scale;
  out.origin = anchor->neck;
  return out;
}

NormalizedSkeleton normalize(const Skeleton& skeleton, double conf_min) {
  if (auto out = try_normalize(skeleton, conf_min)) return *std::move(out);
  if (!skeleton.visible(Joint::Neck, conf_min)) {
    throw Error(Errc::MissingAnchor, "neck is not visible");
  }
  throw Error(Errc::MissingAnchor, "no visible hip or shoulder pair to derive a scale from");
}

Skeleton mirror(const Skeleton& skeleton) {
  Skeleton out = skeleton;
  const double pivot = 2.0 * skeleton.xy(index(Joint::Neck), 0);
  out.xy.col(0) = (pivot - skeleton.xy.col(0).array()).matrix();
  for (int i = 0; i < kJointCount; ++i) {
    const int j = index(opposite(static_cast<Joint>(i)));
    if (j <= i) continue;
    out.xy.row(i).swap(out.xy.row(j));
    std::swap(out.confidence(i), out.confidence(j));
  }
  return out;
}

NormalizedSkeleton mirror(const NormalizedSkeleton& skeleton) {
  NormalizedSkeleton out = skeleton;
  out.xy.col(0) = -skeleton.xy.col(0);
  swap_sides(out.xy, out.visible);
  return out;
}

}  // namespace imitation::pose
