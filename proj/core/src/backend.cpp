#include "concierge/backend.hpp"

#include <fstream>

#include "concierge/error.hpp"
#include "httplib.h"

namespace concierge {

ScriptedBackend::ScriptedBackend(nlohmann::json table) : table_(std::move(table)) {
  if (!table_.is_object()) {
    throw Error(ErrorCode::SchemaError, "scripted backend table must be a JSON object");
  }
  for (const auto& [key, value] : table_.items()) {
    const bool ok = value.is_string() ||
                    (value.is_array() && !value.empty() &&
                     std::all_of(value.begin(), value.end(),
                                 [](const nlohmann::json& v) { return v.is_string(); }));
    if (!ok) {
      throw Error(ErrorCode::SchemaError,
                  "scripted entry '" + key + "' must be a string or array of strings");
    }
  }
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read script " + path.string());
  try {
    return ScriptedBackend(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

std::string ScriptedBackend::complete(const BackendRequest& request) {
  std::lock_guard lock(mu_);
  calls_.push_back(request.key);

  std::vector<std::string> candidates{request.key};
  if (auto slash = request.key.find('/'); slash != std::string::npos) {
    const auto state = request.key.substr(0, slash);
    // "Interview1/3" may also be written "Interview1/turn3".
    candidates.push_back(state + "/turn" + request.key.substr(slash + 1));
    const bool keywords = request.key.size() >= 9 &&
                          request.key.compare(request.key.size() - 9, 9, "/keywords") == 0;
    candidates.push_back(state + (keywords ? "/*/keywords" : "/*"));
  }
  candidates.push_back("*");

  for (const auto& key : candidates) {
    auto it = table_.find(key);
    if (it == table_.end()) continue;
    if (it->is_string()) return it->get<std::string>();
    auto& pos = cursor_[key];
    const auto& arr = *it;
    const auto idx = std::min(pos, arr.size() - 1);
    ++pos;
    return arr[idx].get<std::string>();
  }
  return {};
}

std::vector<std::string> ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
  const std::string prefix = "http://";
  if (config_.endpoint.rfind(prefix, 0) != 0) {
    throw Error(ErrorCode::InvalidRequest,
                "backend endpoint must start with http://: " + config_.endpoint);
  }
  auto rest = config_.endpoint.substr(prefix.size());
  auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  if (auto colon = authority.rfind(':'); colon != std::string::npos) {
    host_ = authority.substr(0, colon);
    try {
      port_ = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidRequest, "bad port in endpoint " + config_.endpoint);
    }
  } else {
    host_ = authority;
  }
  if (host_.empty()) {
    throw Error(ErrorCode::InvalidRequest, "missing host in endpoint " + config_.endpoint);
  }
}

std::string RemoteBackend::complete(const BackendRequest& request) {
  httplib::Client client(host_, port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const nlohmann::json body = {{"system_prompt", request.system_prompt},
                               {"user_context", request.user_context}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::BackendUnavailable,
                "POST " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::BackendUnavailable,
                "POST " + config_.endpoint + " returned HTTP " + std::to_string(res->status));
  }
  try {
    auto reply = nlohmann::json::parse(res->body);
    return reply.at("text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    // An unparseable envelope is still a reachable backend; let the output
    // parser reject it and fall back.
    return {};
  }
}

}  // namespace concierge
