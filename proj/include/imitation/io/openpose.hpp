#pragma once

#include "imitation/pose/skeleton.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imitation::io {

// OpenPose per-frame document: {"people": [{"pose_keypoints_2d": [x0, y0, c0, ...]}]}
// with exactly 54 numbers per person in COCO-18 order. Confidences are clamped
// to [0, 1]; persons whose confidences are all zero are dropped. Extra keys are
// ignored.
//
// Throws Error(MalformedJson) for unparsable text or a wrong shape and
// Error(WrongKeypointCount) when a person does not carry 54 values (BODY_25
// output has 75).
std::vector<pose::Skeleton> parse_openpose_frame(std::string_view text);
std::vector<pose::Skeleton> parse_openpose_document(const nlohmann::json& document);

nlohmann::json openpose_document(std::span<const pose::Skeleton> skeletons);
// Compact single-line JSON; doubles are written with round-trip precision.
std::string serialize_openpose_frame(std::span<const pose::Skeleton> skeletons);

}  // namespace imitation::io
