#include "concierge/scenario.hpp"

#include <algorithm>

namespace concierge {

namespace {

constexpr std::array kIcebreakerActs = {DialogueAct::ChatContinue, DialogueAct::ChatDone};
constexpr std::array kInterviewActs = {DialogueAct::AskMore,
                                       DialogueAct::RequirementsComplete};
constexpr std::array kIntroductionActs = {DialogueAct::IntroDelivered};
constexpr std::array kRecommendationActs = {
    DialogueAct::SpotDiscuss, DialogueAct::SpotAccepted, DialogueAct::AllSpotsRejected};
constexpr std::array kClosingActs = {DialogueAct::PlanConfirmed, DialogueAct::Farewell};

}  // namespace

std::string_view to_string(ScenarioState s) noexcept {
  switch (s) {
    case ScenarioState::Icebreaker: return "Icebreaker";
    case ScenarioState::Interview1: return "Interview1";
    case ScenarioState::Introduction1: return "Introduction1";
    case ScenarioState::Recommendation1: return "Recommendation1";
    case ScenarioState::ResearchInterview1: return "ResearchInterview1";
    case ScenarioState::Interview2: return "Interview2";
    case ScenarioState::Introduction2: return "Introduction2";
    case ScenarioState::Recommendation2: return "Recommendation2";
    case ScenarioState::ResearchInterview2: return "ResearchInterview2";
    case ScenarioState::Closing: return "Closing";
    case ScenarioState::End: return "End";
  }
  return "?";
}

std::string_view to_string(DialogueAct a) noexcept {
  switch (a) {
    case DialogueAct::ChatContinue: return "ChatContinue";
    case DialogueAct::ChatDone: return "ChatDone";
    case DialogueAct::AskMore: return "AskMore";
    case DialogueAct::RequirementsComplete: return "RequirementsComplete";
    case DialogueAct::IntroDelivered: return "IntroDelivered";
    case DialogueAct::SpotAccepted: return "SpotAccepted";
    case DialogueAct::SpotDiscuss: return "SpotDiscuss";
    case DialogueAct::AllSpotsRejected: return "AllSpotsRejected";
    case DialogueAct::PlanConfirmed: return "PlanConfirmed";
    case DialogueAct::Farewell: return "Farewell";
  }
  return "?";
}

std::string_view to_string(Slot s) noexcept {
  return s == Slot::First ? "first" : "second";
}

std::string_view to_string(Speaker s) noexcept {
  return s == Speaker::User ? "user" : "system";
}

std::optional<ScenarioState> parse_state(std::string_view name) noexcept {
  for (auto s : kAllStates) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<DialogueAct> parse_act(std::string_view name) noexcept {
  for (auto a : kAllActs) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::span<const DialogueAct> accepted_acts(ScenarioState s) noexcept {
  switch (s) {
    case ScenarioState::Icebreaker:
      return kIcebreakerActs;
    case ScenarioState::Interview1:
    case ScenarioState::ResearchInterview1:
    case ScenarioState::Interview2:
    case ScenarioState::ResearchInterview2:
      return kInterviewActs;
    case ScenarioState::Introduction1:
    case ScenarioState::Introduction2:
      return kIntroductionActs;
    case ScenarioState::Recommendation1:
    case ScenarioState::Recommendation2:
      return kRecommendationActs;
    case ScenarioState::Closing:
      return kClosingActs;
    case ScenarioState::End:
      return {};
  }
  return {};
}

bool accepts(ScenarioState s, DialogueAct a) noexcept {
  auto acts = accepted_acts(s);
  return std::find(acts.begin(), acts.end(), a) != acts.end();
}

std::optional<Slot> slot_of(ScenarioState s) noexcept {
  switch (s) {
    case ScenarioState::Interview1:
    case ScenarioState::Introduction1:
    case ScenarioState::Recommendation1:
    case ScenarioState::ResearchInterview1:
      return Slot::First;
    case ScenarioState::Interview2:
    case ScenarioState::Introduction2:
    case ScenarioState::Recommendation2:
    case ScenarioState::ResearchInterview2:
      return Slot::Second;
    default:
      return std::nullopt;
  }
}

bool is_interview(ScenarioState s) noexcept {
  return s == ScenarioState::Interview1 || s == ScenarioState::ResearchInterview1 ||
         s == ScenarioState::Interview2 || s == ScenarioState::ResearchInterview2;
}

bool is_introduction(ScenarioState s) noexcept {
  return s == ScenarioState::Introduction1 || s == ScenarioState::Introduction2;
}

bool is_recommendation(ScenarioState s) noexcept {
  return s == ScenarioState::Recommendation1 || s == ScenarioState::Recommendation2;
}

bool shows_spots(ScenarioState s) noexcept {
  return is_introduction(s) || is_recommendation(s);
}

int SessionRecord::user_turn_count() const noexcept {
  return static_cast<int>(std::count_if(
      transcript.begin(), transcript.end(),
      [](const TranscriptEntry& e) { return e.speaker == Speaker::User; }));
}

}  // namespace concierge
