#include "imitation/gesture/motion.hpp"

#include "imitation/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace imitation::gesture {

namespace {

// Joints visible in every sample of the window; their coordinates form the
// trajectory matrix for the principal-component projection.
pose::VisibilityMask common_joints(const std::vector<const PoseSample*>& window) {
  pose::VisibilityMask mask;
  mask.set();
  for (const auto* s : window) mask &= s->skeleton->visible;
  return mask;
}

std::vector<double> smooth(const std::vector<double>& x, int width) {
  if (width <= 1 || x.size() < 3) return x;
  const int half = width / 2;
  const auto n = static_cast<int>(x.size());
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / (hi - lo + 1);
  }
  return out;
}

// Peak times with hysteresis: after a peak the signal must fall below -h
// before the next rise above +h can produce another one. Peak positions are
// refined by a parabola through the three samples around the maximum.
std::vector<double> peak_times(const std::vector<double>& signal, const std::vector<double>& times,
                               double h) {
  std::vector<double> peaks;
  std::size_t best = 0;
  bool in_peak = false;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double v = signal[i];
    if (v > h) {
      if (!in_peak || v > signal[best]) best = i;
      in_peak = true;
    }
    if (in_peak && v < -h) {
      double t = times[best];
      if (best > 0 && best + 1 < signal.size()) {
        const double y0 = signal[best - 1], y1 = signal[best], y2 = signal[best + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        if (denom < 0.0) {
          const double offset = 0.5 * (y0 - y2) / denom;
          const double dt = offset >= 0 ? times[best + 1] - times[best] : times[best] - times[best - 1];
          t += offset * dt;
        }
      }
      peaks.push_back(t);
      in_peak = false;
    }
  }
  return peaks;
}

std::optional<double> rhythm(const std::vector<const PoseSample*>& window, const RhythmConfig& cfg) {
  const auto mask = common_joints(window);
  std::vector<int> joints;
  for (int i = 0; i < pose::kJointCount; ++i) {
    if (mask.test(static_cast<std::size_t>(i))) joints.push_back(i);
  }
  if (joints.empty() || window.size() < 4) return std::nullopt;

  const auto rows = static_cast<Eigen::Index>(window.size());
  const auto cols = static_cast<Eigen::Index>(2 * joints.size());
  Eigen::MatrixXd trajectory(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& xy = window[static_cast<std::size_t>(r)]->skeleton->xy;
    for (std::size_t j = 0; j < joints.size(); ++j) {
      trajectory(r, static_cast<Eigen::Index>(2 * j)) = xy(joints[j], 0);
      trajectory(r, static_cast<Eigen::Index>(2 * j + 1)) = xy(joints[j], 1);
    }
  }
  const Eigen::MatrixXd centered = trajectory.rowwise() - trajectory.colwise().mean();
  const Eigen::MatrixXd covariance = centered.transpose() * centered / static_cast<double>(rows);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) return std::nullopt;
  const double variance = solver.eigenvalues()(cols - 1);
  if (!(variance > cfg.min_variance)) return std::nullopt;

  const Eigen::VectorXd scores = centered * solver.eigenvectors().col(cols - 1);
  std::vector<double> signal(scores.data(), scores.data() + scores.size());
  std::vector<double> times;
  times.reserve(window.size());
  for (const auto* s : window) times.push_back(static_cast<double>(s->timestamp_ms));
  signal = smooth(signal, cfg.smoothing);

  const double h = 0.25 * std::sqrt(variance);
  auto peaks = peak_times(signal, times, h);
  if (peaks.size() < 2) {
    // The principal axis sign is arbitrary; troughs are peaks of the negation.
    for (auto& v : signal) v = -v;
    peaks = peak_times(signal, times, h);
  }
  if (peaks.size() < 2) return std::nullopt;
  std::vector<double> intervals;
  for (std::size_t i = 1; i < peaks.size(); ++i) intervals.push_back(peaks[i] - peaks[i - 1]);
  std::sort(intervals.begin(), intervals.end());
  const std::size_t m = intervals.size();
  return m % 2 == 1 ? intervals[m / 2] : 0.5 * (intervals[m / 2 - 1] + intervals[m / 2]);
}

}  // namespace

MotionStats motion_stats(std::span<const PoseSample> stream, std::int64_t window_ms,
                         const RhythmConfig& config) {
  std::vector<const PoseSample*> window;
  if (!stream.empty()) {
    const std::int64_t from = stream.back().timestamp_ms - window_ms;
    for (const auto& s : stream) {
      if (s.skeleton && s.timestamp_ms >= from) window.push_back(&s);
    }
  }
  if (window.size() < 2) {
    throw Error(Errc::WindowTooSmall, "motion statistics need at least two frames with a skeleton");
  }

  MotionStats out;
  out.window_ms = window_ms;
  double total = 0.0;
  int pairs = 0;
  for (std::size_t i = 1; i < window.size(); ++i) {
    const auto& a = *window[i - 1]->skeleton;
    const auto& b = *window[i]->skeleton;
    const auto shared = a.visible & b.visible;
    double sum = 0.0;
    int n = 0;
    for (int j = 0; j < pose::kJointCount; ++j) {
      if (!shared.test(static_cast<std::size_t>(j))) continue;
      sum += (a.xy.row(j) - b.xy.row(j)).cwiseAbs().sum();
      ++n;
    }
    if (n == 0) continue;
    total += sum / n;
    ++pairs;
  }
  out.energy = pairs > 0 ? total / pairs : 0.0;
  out.rhythm_period_ms = rhythm(window, config);
  return out;
}

bool activity_changed(const MotionStats& previous, const MotionStats& current, double ratio) {
  constexpr double kFloor = 1e-6;
  const double a = std::max(previous.energy, kFloor);
  const double b = std::max(current.energy, kFloor);
  if (b / a > ratio || a / b > ratio) return true;
  if (previous.rhythm_period_ms && current.rhythm_period_ms) {
    const double p = *previous.rhythm_period_ms;
    const double q = *current.rhythm_period_ms;
    if (q / p > ratio || p / q > ratio) return true;
  }
  return false;
}

}  // namespace imitation::gesture
