#include "imitation/io/openpose.hpp"

#include "imitation/error.hpp"

#include <algorithm>
#include <cmath>

namespace imitation::io {

using nlohmann::json;

namespace {

constexpr std::size_t kValuesPerPerson = 3 * pose::kJointCount;

double number_at(const json& values, std::size_t i) {
  const auto& v = values[i];
  if (!v.is_number()) {
    throw Error(Errc::MalformedJson, "pose_keypoints_2d[" + std::to_string(i) + "] is not a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(Errc::MalformedJson, "non-finite keypoint value");
  return d;
}

}  // namespace

std::vector<pose::Skeleton> parse_openpose_frame(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::MalformedJson, "frame is not valid JSON");
  return parse_openpose_document(doc);
}

std::vector<pose::Skeleton> parse_openpose_document(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::MalformedJson, "frame must be a JSON object");
  const auto people = doc.find("people");
  if (people == doc.end() || !people->is_array()) {
    throw Error(Errc::MalformedJson, "missing \"people\" array");
  }

  std::vector<pose::Skeleton> out;
  for (const auto& person : *people) {
    if (!person.is_object()) throw Error(Errc::MalformedJson, "person entry is not an object");
    const auto kp = person.find("pose_keypoints_2d");
    if (kp == person.end() || !kp->is_array()) {
      throw Error(Errc::MalformedJson, "person without \"pose_keypoints_2d\" array");
    }
    if (kp->size() != kValuesPerPerson) {
      throw Error(Errc::WrongKeypointCount,
                  "expected 54 values (COCO-18), got " + std::to_string(kp->size()));
    }
    pose::Skeleton s;
    for (int j = 0; j < pose::kJointCount; ++j) {
      const auto base = static_cast<std::size_t>(3 * j);
      s.xy(j, 0) = number_at(*kp, base);
      s.xy(j, 1) = number_at(*kp, base + 1);
      s.confidence(j) = std::clamp(number_at(*kp, base + 2), 0.0, 1.0);
    }
    if ((s.confidence > 0.0).any()) out.push_back(s);
  }
  return out;
}

json openpose_document(std::span<const pose::Skeleton> skeletons) {
  json people = json::array();
  for (const auto& s : skeletons) {
    json values = json::array();
    for (int j = 0; j < pose::kJointCount; ++j) {
      values.push_back(s.xy(j, 0));
      values.push_back(s.xy(j, 1));
      values.push_back(s.confidence(j));
    }
    people.push_back({{"pose_keypoints_2d", std::move(values)}});
  }
  return {{"version", 1.3}, {"people", std::move(people)}};
}

std::string serialize_openpose_frame(std::span<const pose::Skeleton> skeletons) {
  return openpose_document(skeletons).dump();
}

}  // namespace imitation::io
