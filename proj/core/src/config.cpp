#include "concierge/config.hpp"

#include <cstdlib>
#include <fstream>

#include "concierge/error.hpp"

namespace concierge {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    T out{};
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(value, &used);
    } else {
      out = static_cast<T>(std::stoll(value, &used));
    }
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidRequest, key + ": not a number: '" + value + "'");
  }
}

}  // namespace

EnvLookup process_env() {
  return [](const std::string& key) -> std::optional<std::string> {
    if (const char* v = std::getenv(key.c_str()); v && *v) return std::string(v);
    return std::nullopt;
  };
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "scripted") return BackendKind::Scripted;
  if (name == "remote") return BackendKind::Remote;
  throw Error(ErrorCode::InvalidRequest,
              "backend must be 'scripted' or 'remote', got '" + std::string(name) + "'");
}

void apply_config_file(AppConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, path.string() + ": not an object");
  const auto base = path.parent_path();
  auto rel = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "storage_dir") cfg.storage_dir = rel(value.get<std::string>());
      else if (key == "data_dir") cfg.data_dir = rel(value.get<std::string>());
      else if (key == "backend") cfg.backend = parse_backend_kind(value.get<std::string>());
      else if (key == "script_file") cfg.script_file = rel(value.get<std::string>());
      else if (key == "backend_endpoint") cfg.backend_endpoint = value.get<std::string>();
      else if (key == "backend_key") cfg.backend_key = value.get<std::string>();
      else if (key == "loop_cap") cfg.loop_cap = value.get<int>();
      else if (key == "turn_cap") cfg.turn_cap = value.get<int>();
      else if (key == "threshold_km") cfg.threshold_km = value.get<double>();
      else if (key == "context_turns") cfg.context_turns = value.get<std::size_t>();
      else if (key == "retries") cfg.retries = value.get<int>();
      else if (key == "timeout_ms") cfg.timeout_ms = value.get<int>();
      else if (key == "host") cfg.host = value.get<std::string>();
      else if (key == "port") cfg.port = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else throw Error(ErrorCode::SchemaError, path.string() + ": unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

void apply_env(AppConfig& cfg, const EnvLookup& env) {
  if (auto v = env("CONCIERGE_STORAGE_DIR")) cfg.storage_dir = *v;
  if (auto v = env("CONCIERGE_DATA_DIR")) cfg.data_dir = *v;
  if (auto v = env("CONCIERGE_BACKEND")) cfg.backend = parse_backend_kind(*v);
  if (auto v = env("CONCIERGE_SCRIPT_FILE")) cfg.script_file = *v;
  if (auto v = env("CONCIERGE_BACKEND_ENDPOINT")) cfg.backend_endpoint = *v;
  if (auto v = env("CONCIERGE_BACKEND_KEY")) cfg.backend_key = *v;
  if (auto v = env("CONCIERGE_LOOP_CAP")) cfg.loop_cap = parse_number<int>("CONCIERGE_LOOP_CAP", *v);
  if (auto v = env("CONCIERGE_TURN_CAP")) cfg.turn_cap = parse_number<int>("CONCIERGE_TURN_CAP", *v);
  if (auto v = env("CONCIERGE_THRESHOLD_KM")) {
    cfg.threshold_km = parse_number<double>("CONCIERGE_THRESHOLD_KM", *v);
  }
  if (auto v = env("CONCIERGE_PORT")) cfg.port = parse_number<int>("CONCIERGE_PORT", *v);
}

AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  AppConfig cfg;
  if (file) apply_config_file(cfg, *file);
  apply_env(cfg, env);
  return cfg;
}

ServiceConfig to_service_config(const AppConfig& cfg) {
  ServiceConfig sc;
  sc.storage_dir = cfg.storage_dir;
  sc.engine.loop_cap = cfg.loop_cap;
  sc.engine.turn_cap = cfg.turn_cap;
  sc.prompt.context_turns = cfg.context_turns;
  sc.generation.retries = cfg.retries;
  sc.threshold_km = cfg.threshold_km;
  return sc;
}

std::shared_ptr<GenerationBackend> make_backend(const AppConfig& cfg) {
  if (cfg.backend == BackendKind::Remote) {
    if (cfg.backend_endpoint.empty()) {
      throw Error(ErrorCode::InvalidRequest, "remote backend needs an endpoint");
    }
    return std::make_shared<RemoteBackend>(RemoteBackendConfig{
        cfg.backend_endpoint, cfg.backend_key, std::chrono::milliseconds(cfg.timeout_ms)});
  }
  if (cfg.script_file.empty()) {
    return std::make_shared<ScriptedBackend>(nlohmann::json::object());
  }
  std::ifstream in(cfg.script_file);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read script " + cfg.script_file.string());
  try {
    return std::make_shared<ScriptedBackend>(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, cfg.script_file.string() + ": " + e.what());
  }
}

}  // namespace concierge
