#pragma once

// Reference implementations used only by tests. They read raw pixel
// skeletons through plain arrays and share no code with the library beyond
// the data containers, so agreement between the two is evidence rather than
// tautology.

#include "imitation/gesture/template.hpp"
#include "imitation/pose/skeleton.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

struct Features {
  std::array<double, 13> value{};
  std::array<bool, 13> valid{};
};

// Feature vector straight from pixel coordinates.
Features features(const imitation::pose::Skeleton& s, double conf_min = 0.1);

// Same skeleton with every left/right joint pair exchanged (no reflection).
imitation::pose::Skeleton swap_labels(const imitation::pose::Skeleton& s);

bool limb_visible(const imitation::pose::Skeleton& s, imitation::scene::Limb limb, double conf_min = 0.1);

struct Sample {
  std::int64_t t = 0;
  std::optional<imitation::pose::Skeleton> skeleton;  // nullopt: participant absent
};

enum class Verdict { Success, AttemptFailed, NoAttempt, Unscoreable };
std::string verdict_name(Verdict v);

struct Evaluation {
  Verdict verdict = Verdict::NoAttempt;
  int keyframes_direct = 0;
  int keyframes_mirrored = 0;
  double energy = 0.0;
};

// Per-frame constraint table plus an exhaustive search for the earliest hold
// interval of each keyframe in turn, for both chiralities.
Evaluation evaluate(const std::vector<Sample>& stream, const imitation::gesture::GestureTemplate& t,
                    double attempt_energy_min = 0.02, double unscoreable_fraction = 0.5,
                    double reference_fps = 15.0, double conf_min = 0.1);

// Greetings (pairing=false) or pairing code from the observation names seen
// inside the window: "3", "2" or "1".
std::string wait_phase_code(const std::vector<std::string>& observations, bool pairing);

// Minimum-cost assignment of previous anchors to current anchors by trying
// every permutation. Returns, for each current index, the previous index or -1.
std::vector<int> brute_force_assignment(const std::vector<std::array<double, 2>>& previous,
                                        const std::vector<std::array<double, 2>>& current);

}  // namespace oracle
