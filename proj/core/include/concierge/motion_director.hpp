#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "concierge/scenario.hpp"

namespace concierge {

enum class MotionKind { Nod, Bow, LookMonitor, LookUser };

std::string_view to_string(MotionKind k) noexcept;
std::optional<MotionKind> parse_motion(std::string_view name) noexcept;

struct MotionCommand {
  MotionKind kind = MotionKind::Nod;
  /// Offset from the triggering event.
  int at_ms = 0;
  int duration_ms = 0;

  bool operator==(const MotionCommand&) const = default;
};

enum class DialogueEventKind { UserSpeechStarted, SystemUtteranceReady, ImagesDisplayed, ImagesHidden };

struct DialogueEvent {
  DialogueEventKind kind = DialogueEventKind::UserSpeechStarted;
  /// Utterance text; present only for SystemUtteranceReady.
  std::optional<std::string> payload;

  static DialogueEvent user_speech_started() { return {DialogueEventKind::UserSpeechStarted, {}}; }
  static DialogueEvent system_utterance(std::string text) {
    return {DialogueEventKind::SystemUtteranceReady, std::move(text)};
  }
  static DialogueEvent images_displayed() { return {DialogueEventKind::ImagesDisplayed, {}}; }
  static DialogueEvent images_hidden() { return {DialogueEventKind::ImagesHidden, {}}; }
};

struct MotionConfig {
  int nod_ms = 600;
  int bow_ms = 1500;
  int look_ms = 800;

  static MotionConfig from_json(const nlohmann::json& doc);
};

MotionConfig load_motion_config(const std::filesystem::path& path);
std::vector<std::string> load_phrase_list(const std::filesystem::path& path);

/// Maps one dialogue event to motion commands. Pure and total; never more
/// than two commands.
std::vector<MotionCommand> direct(const DialogueEvent& event, ScenarioState state,
                                  const std::vector<std::string>& greeting_lexicon,
                                  const MotionConfig& config = {});

/// {"kind", "at_ms", "duration_ms"} as one compact JSON line.
std::string to_json_line(const MotionCommand& command);

}  // namespace concierge
