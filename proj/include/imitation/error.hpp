#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace imitation {

// Failure kinds surfaced by the public API. Each maps to one documented error
// of an operation; callers branch on code(), humans read what().
enum class Errc {
  MissingAnchor,
  Incomparable,
  AmbiguousRoles,
  UnknownTrack,
  EmptyStream,
  WindowTooSmall,
  UnknownGesture,
  InvalidTemplate,
  UnknownParticipant,
  IllegalTransition,
  MalformedJson,
  WrongKeypointCount,
  EmptyDirectory,
  StreamError,
  BindFailure,
  DuplicateId,
  SessionClosed,
  UnknownSession,
  SecondOperator,
  InvalidConfig,
  InvalidScript,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace imitation
