#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "concierge/backend.hpp"
#include "concierge/session_service.hpp"

namespace concierge {

enum class BackendKind { Scripted, Remote };

/// Deployment settings. Precedence, lowest first: defaults, config file,
/// CONCIERGE_* environment variables, command-line flags.
struct AppConfig {
  std::filesystem::path storage_dir = "sessions";
  std::filesystem::path data_dir;
  BackendKind backend = BackendKind::Scripted;
  std::filesystem::path script_file;
  std::string backend_endpoint;
  std::string backend_key;
  int loop_cap = 2;
  int turn_cap = 5;
  double threshold_km = kDefaultFeasibleKm;
  std::size_t context_turns = 8;
  int retries = 2;
  int timeout_ms = 15000;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::uint64_t> seed;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

/// Reads the JSON config file over cfg. Unknown keys are rejected.
void apply_config_file(AppConfig& cfg, const std::filesystem::path& path);
/// CONCIERGE_STORAGE_DIR, CONCIERGE_DATA_DIR, CONCIERGE_BACKEND,
/// CONCIERGE_SCRIPT_FILE, CONCIERGE_BACKEND_ENDPOINT, CONCIERGE_BACKEND_KEY,
/// CONCIERGE_LOOP_CAP, CONCIERGE_TURN_CAP, CONCIERGE_THRESHOLD_KM,
/// CONCIERGE_PORT.
void apply_env(AppConfig& cfg, const EnvLookup& env);

AppConfig load_config(const std::optional<std::filesystem::path>& file,
                      const EnvLookup& env = process_env());

BackendKind parse_backend_kind(std::string_view name);
ServiceConfig to_service_config(const AppConfig& cfg);
std::shared_ptr<GenerationBackend> make_backend(const AppConfig& cfg);

}  // namespace concierge
