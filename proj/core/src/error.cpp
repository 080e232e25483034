#include "concierge/error.hpp"

namespace concierge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidAct: return "InvalidAct";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::DuplicateSpot: return "DuplicateSpot";
    case ErrorCode::NotACandidate: return "NotACandidate";
    case ErrorCode::MismatchedAuxiliary: return "MismatchedAuxiliary";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::EmptyInterview: return "EmptyInterview";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::StorageError: return "StorageError";
    case ErrorCode::SessionNotFound: return "SessionNotFound";
    case ErrorCode::SessionEnded: return "SessionEnded";
    case ErrorCode::ConnectError: return "ConnectError";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace concierge
