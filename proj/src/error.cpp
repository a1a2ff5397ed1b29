#include "imitation/error.hpp"

namespace imitation {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingAnchor: return "MissingAnchor";
    case Errc::Incomparable: return "Incomparable";
    case Errc::AmbiguousRoles: return "AmbiguousRoles";
    case Errc::UnknownTrack: return "UnknownTrack";
    case Errc::EmptyStream: return "EmptyStream";
    case Errc::WindowTooSmall: return "WindowTooSmall";
    case Errc::UnknownGesture: return "UnknownGesture";
    case Errc::InvalidTemplate: return "InvalidTemplate";
    case Errc::UnknownParticipant: return "UnknownParticipant";
    case Errc::IllegalTransition: return "IllegalTransition";
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::WrongKeypointCount: return "WrongKeypointCount";
    case Errc::EmptyDirectory: return "EmptyDirectory";
    case Errc::StreamError: return "StreamError";
    case Errc::BindFailure: return "BindFailure";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::SessionClosed: return "SessionClosed";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::SecondOperator: return "SecondOperator";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidScript: return "InvalidScript";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace imitation
