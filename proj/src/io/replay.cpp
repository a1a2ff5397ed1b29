#include "imitation/io/replay.hpp"

#include "imitation/error.hpp"
#include "imitation/io/openpose.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace imitation::io {

namespace fs = std::filesystem;

namespace {

bool is_keypoint_file(const fs::directory_entry& e) {
  constexpr std::string_view suffix = "_keypoints.json";
  const auto name = e.path().filename().string();
  return e.is_regular_file() && name.size() >= suffix.size() &&
         name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::int64_t replay_timestamp(std::size_t index, double fps) {
  return std::llround(static_cast<double>(index) * 1000.0 / fps);
}

ReplaySource::ReplaySource(const fs::path& directory, double fps) : fps_(fps) {
  if (!(fps > 0.0)) throw Error(Errc::InvalidConfig, "replay fps must be positive");
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw Error(Errc::EmptyDirectory, directory.string() + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (is_keypoint_file(entry)) files_.push_back(entry.path());
  }
  if (files_.empty()) {
    throw Error(Errc::EmptyDirectory, "no *_keypoints.json files in " + directory.string());
  }
  std::sort(files_.begin(), files_.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
}

std::optional<pose::Frame> ReplaySource::next() {
  if (position_ >= files_.size()) return std::nullopt;
  const auto index = position_++;
  const auto& path = files_[index];
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::StreamError, path.string() + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();

  pose::Frame frame;
  frame.timestamp_ms = replay_timestamp(index, fps_);
  frame.source = pose::FrameSource::Replay;
  try {
    frame.skeletons = parse_openpose_frame(text.str());
  } catch (const Error& e) {
    throw Error(Errc::StreamError, path.filename().string() + ": " + e.what());
  }
  return frame;
}

std::vector<pose::Frame> replay_directory(const fs::path& directory, double fps) {
  ReplaySource source(directory, fps);
  std::vector<pose::Frame> frames;
  frames.reserve(source.size());
  while (auto f = source.next()) frames.push_back(std::move(*f));
  return frames;
}

}  // namespace imitation::io
