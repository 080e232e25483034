#include "concierge/http_api.hpp"

#include <atomic>

#include <httplib.h>

#include "concierge/scenario_engine.hpp"
#include "concierge/serialization.hpp"

namespace concierge {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SessionNotFound: return 404;
    case ErrorCode::SessionEnded: return 409;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::ConnectError: return 503;
    case ErrorCode::InvalidRequest: return 400;
    default: return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status(code), {{"error", std::string(to_string(code))}, {"message", message}});
}

template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    send_error(res, e.code(), e.what());
  } catch (const std::exception& e) {
    send_error(res, ErrorCode::InvariantViolation, e.what());
  }
}

}  // namespace

struct HttpApi::Impl {
  std::shared_ptr<SessionService> service;
  httplib::Server server;
  std::atomic<bool> bound{false};
};

HttpApi::HttpApi(std::shared_ptr<SessionService> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto& srv = impl_->server;
  auto svc = impl_->service;

  srv.Post("/sessions", [svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      const auto id = svc->create_session();
      const auto s = svc->get_session(id);
      auto body = session_json(s, svc->candidate_cards(s));
      send_json(res, 201, body);
    });
  });

  srv.Post(R"(/sessions/([A-Za-z0-9_\-]+)/turns)",
           [svc](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] {
               json body;
               try {
                 body = json::parse(req.body);
               } catch (const json::parse_error&) {
                 throw Error(ErrorCode::InvalidRequest, "body must be JSON");
               }
               if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
                 throw Error(ErrorCode::InvalidRequest, "body must be {\"text\": string}");
               }
               const auto r = svc->post_user_turn(req.matches[1], body["text"].get<std::string>());
               send_json(res, 200, r);
             });
           });

  srv.Get(R"(/sessions/([A-Za-z0-9_\-]+))",
          [svc](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              const auto s = svc->get_session(req.matches[1]);
              send_json(res, 200, session_json(s, svc->candidate_cards(s)));
            });
          });

  srv.Get("/metrics", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<double> threshold;
      if (req.has_param("threshold_km")) {
        const auto raw = req.get_param_value("threshold_km");
        try {
          std::size_t used = 0;
          threshold = std::stod(raw, &used);
          if (used != raw.size() || !(*threshold >= 0.0)) throw std::invalid_argument(raw);
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidRequest, "threshold_km must be a non-negative number");
        }
      }
      send_json(res, 200, svc->metrics(threshold));
    });
  });

  srv.Get("/transitions", [](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, transition_table_json()); });
  });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const auto code = res.status == 404 ? ErrorCode::SessionNotFound : ErrorCode::InvalidRequest;
      res.set_content(json{{"error", res.status == 404 ? "NotFound" : std::string(to_string(code))},
                           {"message", "no such route"}}
                          .dump(),
                      "application/json; charset=utf-8");
    }
  });
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
  int bound = 0;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else {
    bound = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (bound <= 0) {
    throw Error(ErrorCode::ConnectError, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void HttpApi::listen() {
  if (!impl_->bound) throw Error(ErrorCode::InvariantViolation, "listen() before bind()");
  impl_->server.listen_after_bind();
}

void HttpApi::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpApi::running() const { return impl_->server.is_running(); }

}  // namespace concierge
