#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace concierge {

enum class ErrorCode {
  InvalidAct,
  InvariantViolation,
  DuplicateSpot,
  NotACandidate,
  MismatchedAuxiliary,
  BackendUnavailable,
  EmptyInterview,
  SchemaError,
  DuplicateId,
  StorageError,
  SessionNotFound,
  SessionEnded,
  ConnectError,
  InvalidRequest,
};

std::string_view to_string(ErrorCode code) noexcept;

/// The single exception type thrown by the library. Callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace concierge
