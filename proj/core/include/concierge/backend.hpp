#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace concierge {

struct BackendRequest {
  /// "<state>/<turn>" for responses, "<state>/<turn>/keywords" for keywords.
  std::string key;
  std::string system_prompt;
  std::string user_context;
};

/// Synchronous text-in/text-out generation. Implementations throw
/// Error(BackendUnavailable) on transport failure; malformed text is returned
/// as-is and handled by the caller.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string complete(const BackendRequest& request) = 0;
};

/// Replays canned outputs from a {"<state>/<turn>": raw} table.
///
/// Lookup order is the exact key, then "<state>/*", then "*". A value may be a
/// string or an array of strings; arrays are consumed one element per call
/// for that key and the last element repeats. Missing keys yield "".
class ScriptedBackend : public GenerationBackend {
 public:
  explicit ScriptedBackend(nlohmann::json table);
  static ScriptedBackend from_file(const std::filesystem::path& path);

  std::string complete(const BackendRequest& request) override;

  /// Keys requested so far, in call order.
  std::vector<std::string> calls() const;

 private:
  mutable std::mutex mu_;
  nlohmann::json table_;
  std::map<std::string, std::size_t> cursor_;
  std::vector<std::string> calls_;
};

struct RemoteBackendConfig {
  /// http://host[:port]/path
  std::string endpoint;
  std::string api_key;
  std::chrono::milliseconds timeout{15000};
};

/// POSTs {system_prompt, user_context} and reads {text} from the reply.
class RemoteBackend : public GenerationBackend {
 public:
  explicit RemoteBackend(RemoteBackendConfig config);
  std::string complete(const BackendRequest& request) override;

 private:
  RemoteBackendConfig config_;
  std::string host_;
  int port_ = 80;
  std::string path_;
};

}  // namespace concierge
