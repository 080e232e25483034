#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "concierge/backend.hpp"
#include "concierge/scenario.hpp"

namespace concierge {

struct GenreEntry {
  std::string name;
  std::string detail;

  bool operator==(const GenreEntry&) const = default;
};

/// Non-empty, unique genre names. Shown to the model during interviews.
class GenreList {
 public:
  GenreList() = default;
  /// Throws Error(SchemaError) when empty or when names repeat.
  explicit GenreList(std::vector<GenreEntry> entries);

  const std::vector<GenreEntry>& entries() const noexcept { return entries_; }
  bool operator==(const GenreList&) const = default;

 private:
  std::vector<GenreEntry> entries_;
};

GenreList load_genre_list(const std::filesystem::path& path);

struct SpotDigestRow {
  std::string spot_id;
  std::string name;
  std::string reading;
  std::string reason;
  std::vector<std::string> top_genres;
  /// Only for second-slot candidates.
  std::optional<double> distance_from_first_km;

  bool operator==(const SpotDigestRow&) const = default;
};

/// The filtered candidate information injected into introduction and
/// recommendation prompts. At most three rows.
struct SpotDigest {
  std::vector<SpotDigestRow> rows;

  bool operator==(const SpotDigest&) const = default;
};

/// Digest of the session's current candidates for slot. Rows for the second
/// slot carry the distance from the first chosen spot.
SpotDigest make_spot_digest(const SessionRecord& session, Slot slot);

using CatalogView = std::variant<std::monostate, GenreList, SpotDigest>;

struct FewShotExample {
  std::string user_text;
  std::string system_text;
  DialogueAct act;

  bool operator==(const FewShotExample&) const = default;
};

struct PromptBundle {
  ScenarioState state = ScenarioState::Icebreaker;
  /// 1-based index of the user turn this prompt answers.
  int turn_index = 0;
  std::string instructions;
  std::string flow_description;
  std::vector<FewShotExample> few_shot_examples;
  std::vector<TranscriptEntry> context_window;
  CatalogView auxiliary;

  bool operator==(const PromptBundle&) const = default;
};

struct PromptOptions {
  std::size_t context_turns = 8;
};

/// Pure. Throws Error(MismatchedAuxiliary) when catalog_view does not fit the
/// state: interviews take a GenreList, introductions and recommendations a
/// SpotDigest, everything else nothing.
PromptBundle build_prompt(ScenarioState state, const SessionRecord& session,
                          CatalogView catalog_view, const PromptOptions& options = {});

/// Byte-stable JSON rendering used for golden files and logging.
std::string serialize(const PromptBundle& bundle);

/// Flattens a bundle into the backend wire request.
BackendRequest to_request(const PromptBundle& bundle);

struct GenerationOutput {
  std::string response_text;
  DialogueAct act = DialogueAct::ChatContinue;
  /// True when the output is the templated fallback rather than model text.
  bool fallback = false;
  int attempts = 1;

  bool operator==(const GenerationOutput&) const = default;
};

struct ParseFailure {
  std::string reason;
};

using ParseResult = std::variant<GenerationOutput, ParseFailure>;

/// Reads "RESPONSE: <text>\nACT: <label>". Never throws.
ParseResult parse_output(std::string_view raw, ScenarioState state) noexcept;

/// The act used when the backend keeps producing unusable text. None for End.
std::optional<DialogueAct> fallback_act(ScenarioState state) noexcept;
std::string_view fallback_response(ScenarioState state) noexcept;

struct GenerateOptions {
  int retries = 2;
};

/// Calls the backend up to 1 + retries times. Malformed output degrades to the
/// state's fallback; only transport failure escapes, as
/// Error(BackendUnavailable).
GenerationOutput generate(const PromptBundle& bundle, GenerationBackend& backend,
                          const GenerateOptions& options = {});

// -- keywords ----------------------------------------------------------------

struct LexiconEntry {
  std::string surface;
  std::string keyword;
};

/// Surface form -> search keyword table for the rule-based extractor.
struct KeywordLexicon {
  std::vector<LexiconEntry> entries;
};

KeywordLexicon load_keyword_lexicon(const std::filesystem::path& path);

inline constexpr std::size_t kMaxKeywords = 5;

/// User utterances of the most recent interview phase for slot.
std::vector<std::string> interview_user_turns(const SessionRecord& session, Slot slot);

/// Longest-match scan over the texts for lexicon surfaces and genre names.
/// Returns 1..5 keywords; if nothing matches, the trimmed last utterance.
std::vector<std::string> rule_based_keywords(const std::vector<std::string>& texts,
                                             const KeywordLexicon& lexicon,
                                             const GenreList& genres);

/// Reads "KEYWORDS: a, b, c". nullopt when malformed or empty.
std::optional<std::vector<std::string>> parse_keywords(std::string_view raw) noexcept;

/// Asks the backend for keywords and falls back to the rule-based extractor
/// when its output is unusable. Throws Error(EmptyInterview) when the slot's
/// interview has no user turns.
std::vector<std::string> extract_keywords(const SessionRecord& session, Slot slot,
                                          GenerationBackend& backend,
                                          const KeywordLexicon& lexicon,
                                          const GenreList& genres,
                                          const GenerateOptions& options = {});

}  // namespace concierge
