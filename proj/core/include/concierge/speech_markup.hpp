#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "concierge/spot_catalog.hpp"

namespace concierge {

enum class EmphasisCategory { SpotName, PersonName, Question };

std::string_view to_string(EmphasisCategory c) noexcept;

struct EmphasisSpan {
  /// Code-point offsets into the utterance, half-open.
  std::size_t start = 0;
  std::size_t end = 0;
  int level = 1;
  EmphasisCategory category = EmphasisCategory::Question;
  double volume_delta = 0.0;
  double rate_factor = 1.0;
  int pause_before_ms = 0;
  int pause_after_ms = 0;
  /// Reading with '|' word breaks; set only for spot names.
  std::optional<std::string> phonetic;

  bool operator==(const EmphasisSpan&) const = default;
};

struct SpeechMarkup {
  std::string plain_text;
  std::vector<EmphasisSpan> spans;

  bool operator==(const SpeechMarkup&) const = default;
};

struct LevelProsody {
  double volume_delta = 0.0;
  double rate_factor = 1.0;
  int pause_before_ms = 0;
  int pause_after_ms = 0;

  bool operator==(const LevelProsody&) const = default;
};

/// Prosody per emphasis level (index 0 is level 1) and the level each
/// category is spoken at.
struct EmphasisProfile {
  std::array<LevelProsody, 3> levels{};
  int spot_level = 3;
  int person_level = 2;
  int question_level = 1;

  const LevelProsody& at(int level) const { return levels.at(level - 1); }

  static EmphasisProfile defaults();
  static EmphasisProfile from_json(const nlohmann::json& doc);

  bool operator==(const EmphasisProfile&) const = default;
};

EmphasisProfile load_emphasis_profile(const std::filesystem::path& path);

/// Problems with a profile document, empty when it is usable.
std::vector<std::string> validate_profile(const nlohmann::json& doc);

/// Marks spot names, person names and interrogative sentences. Overlaps are
/// settled by length, then spot > person > question; question spans are
/// trimmed around the name spans inside them.
SpeechMarkup annotate(std::string_view utterance, const std::vector<Spot>& known_spots,
                      const std::vector<std::string>& person_lexicon,
                      const EmphasisProfile& profile = EmphasisProfile::defaults());

/// SSML subset: <speak>, <prosody>, <break>, <sub>. Span prosody comes from
/// the profile, not from the spans.
std::string render(const SpeechMarkup& markup,
                   const EmphasisProfile& profile = EmphasisProfile::defaults());

/// Removes tags and decodes the five XML entities.
std::string strip_markup(std::string_view document);

}  // namespace concierge
