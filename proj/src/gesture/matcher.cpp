#include "imitation/gesture/matcher.hpp"

#include "imitation/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace imitation::gesture {

namespace {

bool limbs_visible(const pose::VisibilityMask& mask, const std::vector<scene::Limb>& limbs) {
  if (limbs.empty()) return true;
  const auto report = scene::visibility(mask);
  return std::all_of(limbs.begin(), limbs.end(),
                     [&](scene::Limb l) { return report.limb(l); });
}

bool keyframe_satisfied(const KeyframeSpec& kf, const PoseSample& s, double extent_scale) {
  if (!limbs_visible(s.visible(), kf.required_limbs)) return false;
  return std::all_of(kf.constraints.begin(), kf.constraints.end(),
                     [&](const Constraint& c) { return satisfied(c, s.features, extent_scale); });
}

struct Progress {
  std::vector<std::optional<std::int64_t>> times;
  int matched = 0;
  double unscoreable_fraction = 0.0;
};

Progress run_automaton(std::span<const PoseSample> window, const GestureTemplate& t,
                       double extent_scale) {
  Progress p;
  p.times.assign(t.keyframes.size(), std::nullopt);
  std::int64_t run_start = 0;
  bool running = false;
  const auto count = static_cast<int>(t.keyframes.size());

  std::vector<scene::Limb> required;
  for (const auto& kf : t.keyframes) {
    for (const auto l : kf.required_limbs) {
      if (std::find(required.begin(), required.end(), l) == required.end()) required.push_back(l);
    }
  }
  int hidden = 0;

  for (const auto& sample : window) {
    if (!limbs_visible(sample.visible(), required)) ++hidden;
    if (p.matched == count) continue;
    const auto& kf = t.keyframes[static_cast<std::size_t>(p.matched)];
    if (!keyframe_satisfied(kf, sample, extent_scale)) {
      running = false;
      continue;
    }
    if (!running) {
      run_start = sample.timestamp_ms;
      running = true;
    }
    if (sample.timestamp_ms - run_start >= kf.hold_ms) {
      p.times[static_cast<std::size_t>(p.matched)] = sample.timestamp_ms;
      ++p.matched;
      running = false;
    }
  }
  p.unscoreable_fraction = window.empty() ? 0.0 : static_cast<double>(hidden) / window.size();
  return p;
}

// Side choice that does not depend on which hand is called left: more
// keyframes, then better visibility of the required limbs, then the earlier
// completion. A complete tie keeps the direct reading.
bool prefer(const Progress& a, const Progress& b) {
  if (a.matched != b.matched) return a.matched > b.matched;
  if (a.unscoreable_fraction != b.unscoreable_fraction) {
    return a.unscoreable_fraction < b.unscoreable_fraction;
  }
  if (a.matched == 0) return false;
  return *a.times[static_cast<std::size_t>(a.matched - 1)] < *b.times[static_cast<std::size_t>(b.matched - 1)];
}

double l1_displacement(const pose::NormalizedSkeleton& a, const pose::NormalizedSkeleton& b,
                       bool& any) {
  const auto shared = a.visible & b.visible;
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < pose::kJointCount; ++i) {
    if (!shared.test(static_cast<std::size_t>(i))) continue;
    sum += (a.xy.row(i) - b.xy.row(i)).cwiseAbs().sum();
    ++n;
  }
  any = n > 0;
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

PoseSample make_sample(std::int64_t timestamp_ms, const pose::Skeleton& skeleton, double conf_min) {
  PoseSample s;
  s.timestamp_ms = timestamp_ms;
  s.skeleton = pose::try_normalize(skeleton, conf_min);
  if (s.skeleton) s.features = pose::extract_features(*s.skeleton);
  return s;
}

PoseSample absent_sample(std::int64_t timestamp_ms) {
  PoseSample s;
  s.timestamp_ms = timestamp_ms;
  return s;
}

std::string_view status_name(MatchStatus s) noexcept {
  switch (s) {
    case MatchStatus::Success: return "success";
    case MatchStatus::AttemptFailed: return "attempt_failed";
    case MatchStatus::NoAttempt: return "no_attempt";
    case MatchStatus::Unscoreable: return "unscoreable";
  }
  return "no_attempt";
}

std::string_view chirality_name(Chirality c) noexcept {
  return c == Chirality::Direct ? "direct" : "mirrored";
}

std::optional<MatchStatus> status_from_name(std::string_view name) noexcept {
  for (const auto s : {MatchStatus::Success, MatchStatus::AttemptFailed, MatchStatus::NoAttempt,
                       MatchStatus::Unscoreable}) {
    if (status_name(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Chirality> chirality_from_name(std::string_view name) noexcept {
  if (name == "direct") return Chirality::Direct;
  if (name == "mirrored") return Chirality::Mirrored;
  return std::nullopt;
}

double attempt_energy(std::span<const PoseSample> stream, double reference_fps) {
  const double reference_dt = 1000.0 / reference_fps;
  double total = 0.0;
  int pairs = 0;
  const PoseSample* previous = nullptr;
  for (const auto& s : stream) {
    if (!s.skeleton) continue;
    if (previous != nullptr) {
      bool any = false;
      const double d = l1_displacement(*previous->skeleton, *s.skeleton, any);
      const auto dt = static_cast<double>(s.timestamp_ms - previous->timestamp_ms);
      if (any && dt > 0.0) {
        total += d * reference_dt / dt;
        ++pairs;
      }
    }
    previous = &s;
  }
  return pairs > 0 ? total / pairs : 0.0;
}

MatchResult match_gesture(std::span<const PoseSample> stream, const GestureTemplate& t,
                          const MatchConfig& config) {
  if (stream.empty()) throw Error(Errc::EmptyStream, "no frames supplied to the matcher");
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].timestamp_ms <= stream[i - 1].timestamp_ms) {
      throw Error(Errc::StreamError, "matcher timestamps must be strictly increasing");
    }
  }

  const std::int64_t start = stream.front().timestamp_ms;
  const auto end = std::find_if(stream.begin(), stream.end(), [&](const PoseSample& s) {
    return s.timestamp_ms - start > t.timeout_ms;
  });
  const std::span<const PoseSample> window(stream.begin(), end);
  const double extent_scale = config.arm_length.value_or(1.0);

  const Progress direct = run_automaton(window, t, extent_scale);
  const Progress mirror = run_automaton(window, mirrored(t), extent_scale);
  const bool use_mirror = prefer(mirror, direct);
  const Progress& chosen = use_mirror ? mirror : direct;

  MatchResult r;
  r.chirality = use_mirror ? Chirality::Mirrored : Chirality::Direct;
  r.keyframe_times = chosen.times;
  r.keyframes_matched = chosen.matched;
  r.unscoreable_fraction = chosen.unscoreable_fraction;
  r.energy = attempt_energy(window, config.reference_fps);

  const GestureTemplate chosen_template = use_mirror ? mirrored(t) : t;
  r.best_similarity.assign(t.keyframes.size(), 0.0);
  for (std::size_t k = 0; k < chosen_template.keyframes.size(); ++k) {
    const auto reference = reference_features(chosen_template.keyframes[k]);
    for (const auto& s : window) {
      if (const auto sim = pose::try_similarity(s.features, reference)) {
        r.best_similarity[k] = std::max(r.best_similarity[k], *sim);
      }
    }
  }

  const auto count = static_cast<int>(t.keyframes.size());
  if (r.keyframes_matched == count) {
    r.status = MatchStatus::Success;
  } else if (r.unscoreable_fraction > config.unscoreable_fraction) {
    r.status = MatchStatus::Unscoreable;
  } else if (r.keyframes_matched > 0 || r.energy > config.attempt_energy_min) {
    r.status = MatchStatus::AttemptFailed;
  } else {
    r.status = MatchStatus::NoAttempt;
  }
  return r;
}

PoseCommand mirror_pose_command(const pose::NormalizedSkeleton& participant) {
  const auto swapped = pose::swap_sides(pose::extract_features(participant));
  PoseCommand cmd;
  for (const auto f : pose::kAllFeatures) {
    if (!pose::is_angle(f) || !swapped.is_valid(f)) continue;
    cmd.targets.emplace(std::string(pose::feature_name(f)), swapped[f]);
  }
  return cmd;
}

PoseCommand mirror_pose_command(const pose::Skeleton& participant, double conf_min) {
  return mirror_pose_command(pose::normalize(participant, conf_min));
}

std::optional<double> calibrate_arm_length(std::span<const PoseSample> tpose) {
  using pose::Joint;
  double total = 0.0;
  int n = 0;
  for (const auto& s : tpose) {
    if (!s.skeleton) continue;
    const auto& k = *s.skeleton;
    for (const auto& [sh, el, wr] : {std::tuple{Joint::RShoulder, Joint::RElbow, Joint::RWrist},
                                     std::tuple{Joint::LShoulder, Joint::LElbow, Joint::LWrist}}) {
      if (!k.is_visible(sh) || !k.is_visible(el) || !k.is_visible(wr)) continue;
      total += (k.point(el) - k.point(sh)).norm() + (k.point(wr) - k.point(el)).norm();
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return total / n;
}

}  // namespace imitation::gesture
