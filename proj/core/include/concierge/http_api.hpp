#pragma once

#include <memory>
#include <string>

#include "concierge/error.hpp"
#include "concierge/session_service.hpp"

namespace concierge {

/// JSON-over-HTTP front end for SessionService.
///
///   POST /sessions                 -> 201 {session_id, state, ...}
///   POST /sessions/{id}/turns      {text} -> TurnResponse
///   GET  /sessions/{id}            -> session view
///   GET  /metrics[?threshold_km=]  -> MetricsReport
///   GET  /transitions              -> transition table
///
/// Errors are {error, message} with 400/404/409/500/503 statuses.
class HttpApi {
 public:
  explicit HttpApi(std::shared_ptr<SessionService> service);
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  /// Throws Error(ConnectError) when the address cannot be bound.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires a prior bind().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status used for an error code.
int http_status(ErrorCode code) noexcept;

}  // namespace concierge
