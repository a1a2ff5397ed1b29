#pragma once

#include "imitation/gesture/matcher.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace imitation::gesture {

struct MotionStats {
  std::int64_t window_ms = 0;
  double energy = 0.0;  // mean per-frame joint displacement, normalized units
  std::optional<double> rhythm_period_ms;

  bool operator==(const MotionStats&) const = default;
};

struct RhythmConfig {
  // Below this variance (normalized units squared) along the dominant motion
  // direction the window is considered still and carries no rhythm.
  double min_variance = 1e-5;
  int smoothing = 3;  // moving-average width, frames
};

// Statistics over the last window_ms of the stream. The rhythm is the median
// interval between peaks of the dominant motion component (first principal
// component of the joint trajectories), so one back-and-forth movement counts
// as one period. Throws Error(WindowTooSmall) with fewer than two skeletons.
MotionStats motion_stats(std::span<const PoseSample> stream, std::int64_t window_ms,
                         const RhythmConfig& config = {});

// True when energy or rhythm period changed by more than `ratio` in either
// direction between consecutive windows. Operator-facing suggestion only.
bool activity_changed(const MotionStats& previous, const MotionStats& current,
                      double ratio = 1.5);

}  // namespace imitation::gesture
