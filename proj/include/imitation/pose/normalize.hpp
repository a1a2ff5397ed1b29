#pragma once

#include "imitation/pose/skeleton.hpp"

#include <optional>

namespace imitation::pose {

enum class ScaleSource { Hips, Shoulders };

// Skeleton expressed relative to the neck and divided by the torso length
// (neck to mid-hip). When no hip is visible the scale falls back to twice the
// shoulder-to-shoulder distance.
struct NormalizedSkeleton {
  Coords xy = Coords::Zero();
  VisibilityMask visible;
  ScaleSource scale_source = ScaleSource::Hips;
  double scale = 1.0;          // pixels per normalized unit
  Point origin = Point::Zero();  // neck position in pixels

  Point point(Joint j) const { return xy.row(index(j)).transpose(); }
  bool is_visible(Joint j) const { return visible.test(static_cast<std::size_t>(index(j))); }
};

// Mean of the visible hips, if any.
std::optional<Point> mid_hip(const Skeleton& s, double conf_min = kDefaultConfMin);

// Throws Error(MissingAnchor) when the neck is invisible or no scale reference exists.
NormalizedSkeleton normalize(const Skeleton& skeleton, double conf_min = kDefaultConfMin);
std::optional<NormalizedSkeleton> try_normalize(const Skeleton& skeleton,
                                                double conf_min = kDefaultConfMin) noexcept;

// Swap left/right labels and reflect x about the neck's x coordinate.
// The reflection is x' = 2 n - x, which is an exact involution whenever that
// difference is representable (always true for coordinates on a common binary
// grid, e.g. pixel values with a bounded number of fractional bits).
Skeleton mirror(const Skeleton& skeleton);

// Same operation in neck-centred space: swap labels and negate x. Exact.
NormalizedSkeleton mirror(const NormalizedSkeleton& skeleton);

}  // namespace imitation::pose
