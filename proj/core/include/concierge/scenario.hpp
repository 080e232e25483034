#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "concierge/spot_catalog.hpp"

namespace concierge {

enum class ScenarioState {
  Icebreaker,
  Interview1,
  Introduction1,
  Recommendation1,
  ResearchInterview1,
  Interview2,
  Introduction2,
  Recommendation2,
  ResearchInterview2,
  Closing,
  End,
};

inline constexpr std::array kAllStates = {
    ScenarioState::Icebreaker,         ScenarioState::Interview1,
    ScenarioState::Introduction1,      ScenarioState::Recommendation1,
    ScenarioState::ResearchInterview1, ScenarioState::Interview2,
    ScenarioState::Introduction2,      ScenarioState::Recommendation2,
    ScenarioState::ResearchInterview2, ScenarioState::Closing,
    ScenarioState::End,
};

enum class DialogueAct {
  ChatContinue,
  ChatDone,
  AskMore,
  RequirementsComplete,
  IntroDelivered,
  SpotAccepted,
  SpotDiscuss,
  AllSpotsRejected,
  PlanConfirmed,
  Farewell,
};

inline constexpr std::array kAllActs = {
    DialogueAct::ChatContinue,     DialogueAct::ChatDone,
    DialogueAct::AskMore,          DialogueAct::RequirementsComplete,
    DialogueAct::IntroDelivered,   DialogueAct::SpotAccepted,
    DialogueAct::SpotDiscuss,      DialogueAct::AllSpotsRejected,
    DialogueAct::PlanConfirmed,    DialogueAct::Farewell,
};

std::string_view to_string(ScenarioState s) noexcept;
std::string_view to_string(DialogueAct a) noexcept;
/// Case-sensitive match against the enumerator names.
std::optional<ScenarioState> parse_state(std::string_view name) noexcept;
std::optional<DialogueAct> parse_act(std::string_view name) noexcept;

/// Acts a state will take. End accepts none.
std::span<const DialogueAct> accepted_acts(ScenarioState s) noexcept;
bool accepts(ScenarioState s, DialogueAct a) noexcept;

enum class Slot { First, Second };

inline constexpr std::size_t index_of(Slot s) noexcept {
  return s == Slot::First ? 0 : 1;
}
std::string_view to_string(Slot s) noexcept;

/// Which spot slot a state works on; nullopt for Icebreaker, Closing, End.
std::optional<Slot> slot_of(ScenarioState s) noexcept;

bool is_interview(ScenarioState s) noexcept;       // Interview or ResearchInterview
bool is_introduction(ScenarioState s) noexcept;
bool is_recommendation(ScenarioState s) noexcept;
/// Introduction and Recommendation states display candidate spots.
bool shows_spots(ScenarioState s) noexcept;

enum class Speaker { User, System };
std::string_view to_string(Speaker s) noexcept;

struct TranscriptEntry {
  Speaker speaker = Speaker::User;
  std::string text;
  std::int64_t timestamp_ms = 0;
  /// State the turn was taken in.
  ScenarioState state = ScenarioState::Icebreaker;

  bool operator==(const TranscriptEntry&) const = default;
};

/// Per-session state. Slot-indexed arrays hold the first/second spot data.
struct SessionRecord {
  std::string session_id;
  ScenarioState state = ScenarioState::Icebreaker;
  std::vector<TranscriptEntry> transcript;
  std::array<std::vector<std::string>, 2> keywords;
  std::array<std::vector<Spot>, 2> candidates;
  /// Ids of candidates the user turned down; excluded from re-searches.
  std::array<std::vector<std::string>, 2> rejected_ids;
  std::optional<Spot> first_choice;
  std::optional<TourPlan> plan;
  std::array<int, 2> research_loops{0, 0};
  /// User turns taken in the current state, including the one in progress.
  int interview_turns = 0;
  bool plan_confirmed = false;

  const std::vector<Spot>& candidates_for(Slot s) const {
    return candidates[index_of(s)];
  }
  int user_turn_count() const noexcept;

  bool operator==(const SessionRecord&) const = default;
};

}  // namespace concierge
