#include "concierge/motion_director.hpp"

#include <fstream>

#include "concierge/error.hpp"
#include "concierge/text.hpp"

namespace concierge {

std::string_view to_string(MotionKind k) noexcept {
  switch (k) {
    case MotionKind::Nod: return "Nod";
    case MotionKind::Bow: return "Bow";
    case MotionKind::LookMonitor: return "LookMonitor";
    case MotionKind::LookUser: return "LookUser";
  }
  return "?";
}

std::optional<MotionKind> parse_motion(std::string_view name) noexcept {
  for (auto k : {MotionKind::Nod, MotionKind::Bow, MotionKind::LookMonitor, MotionKind::LookUser}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

MotionConfig MotionConfig::from_json(const nlohmann::json& doc) {
  MotionConfig c;
  c.nod_ms = doc.value("nod_ms", c.nod_ms);
  c.bow_ms = doc.value("bow_ms", c.bow_ms);
  c.look_ms = doc.value("look_ms", c.look_ms);
  if (c.nod_ms <= 0 || c.bow_ms <= 0 || c.look_ms <= 0) {
    throw Error(ErrorCode::SchemaError, "motion durations must be positive");
  }
  return c;
}

MotionConfig load_motion_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read " + path.string());
  try {
    return MotionConfig::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

std::vector<std::string> load_phrase_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

std::vector<MotionCommand> direct(const DialogueEvent& event, ScenarioState /*state*/,
                                  const std::vector<std::string>& greeting_lexicon,
                                  const MotionConfig& config) {
  switch (event.kind) {
    case DialogueEventKind::UserSpeechStarted:
      return {{MotionKind::Nod, 0, config.nod_ms}};
    case DialogueEventKind::ImagesDisplayed:
      return {{MotionKind::LookMonitor, 0, config.look_ms}};
    case DialogueEventKind::ImagesHidden:
      return {{MotionKind::LookUser, 0, config.look_ms}};
    case DialogueEventKind::SystemUtteranceReady: {
      if (!event.payload) return {};
      const auto utterance = text::normalize(*event.payload);
      for (const auto& phrase : greeting_lexicon) {
        const auto p = text::normalize(phrase);
        if (!p.empty() && utterance.rfind(p, 0) == 0) {
          return {{MotionKind::Bow, 0, config.bow_ms}};
        }
      }
      return {};
    }
  }
  return {};
}

std::string to_json_line(const MotionCommand& command) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(command.kind);
  j["at_ms"] = command.at_ms;
  j["duration_ms"] = command.duration_ms;
  return j.dump();
}

}  // namespace concierge
