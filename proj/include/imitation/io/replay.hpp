#pragma once

#include "imitation/pose/skeleton.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace imitation::io {

// Frames from a directory of OpenPose *_keypoints.json files, in
// lexicographic filename order. Frame i is stamped round(i * 1000 / fps) ms.
class ReplaySource {
 public:
  // Throws Error(EmptyDirectory) when no matching file exists (or the path is
  // not a directory) and Error(InvalidConfig) for fps <= 0.
  ReplaySource(const std::filesystem::path& directory, double fps);

  // Throws Error(StreamError) naming the file when a frame cannot be parsed;
  // frames delivered before it stay valid and the source can continue.
  std::optional<pose::Frame> next();

  std::size_t size() const { return files_.size(); }
  std::size_t position() const { return position_; }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::vector<std::filesystem::path> files_;
  double fps_;
  std::size_t position_ = 0;
};

std::int64_t replay_timestamp(std::size_t index, double fps);

// Whole directory at once; the first bad file aborts with Error(StreamError).
std::vector<pose::Frame> replay_directory(const std::filesystem::path& directory, double fps);

}  // namespace imitation::io
