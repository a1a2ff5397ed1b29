#pragma once

#include "imitation/io/queue.hpp"
#include "imitation/pose/skeleton.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace imitation::io {

// Newline-delimited OpenPose documents, each optionally carrying an integer
// "t_ms". Lines without it are stamped with their arrival time. Malformed or
// overlong lines are skipped and counted; regressing timestamps are clamped to
// the last delivered one, with a warning.
class LineDecoder {
 public:
  explicit LineDecoder(std::size_t max_line_bytes = 1 << 20) : max_line_bytes_(max_line_bytes) {}

  // Decodes every complete line in `bytes`; a trailing partial line is kept
  // for the next call.
  std::vector<pose::Frame> feed(std::string_view bytes, std::int64_t arrival_ms);
  // Flushes a final unterminated line, as at end of stream.
  std::vector<pose::Frame> finish(std::int64_t arrival_ms);

  std::optional<pose::Frame> decode_line(std::string_view line, std::int64_t arrival_ms);

  std::size_t warning_count() const { return warning_count_; }
  std::size_t frames_decoded() const { return frames_; }
  // The most recent warnings, oldest first, at most 64.
  const std::vector<std::string>& recent_warnings() const { return recent_; }

 private:
  void warn(std::string message);

  std::size_t max_line_bytes_;
  std::string pending_;
  bool discarding_ = false;  // inside an overlong line
  std::optional<std::int64_t> last_timestamp_;
  std::size_t warning_count_ = 0;
  std::size_t frames_ = 0;
  std::vector<std::string> recent_;
};

// TCP listener feeding decoded frames into a queue. Connections are served
// concurrently; each has its own decoder but they share the session clock.
class LiveListener {
 public:
  // endpoint is "host:port" or ":port"; port 0 picks a free port.
  // Throws Error(BindFailure).
  LiveListener(const std::string& endpoint, BoundedQueue<pose::Frame>& frames);
  ~LiveListener();
  LiveListener(const LiveListener&) = delete;
  LiveListener& operator=(const LiveListener&) = delete;

  std::uint16_t port() const;
  std::size_t warning_count() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Splits "host:port"; an empty host means all interfaces. Throws
// Error(InvalidConfig) for a malformed endpoint.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

}  // namespace imitation::io
