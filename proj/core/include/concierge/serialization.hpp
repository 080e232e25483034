#pragma once

#include <nlohmann/json.hpp>

#include "concierge/scenario.hpp"
#include "concierge/session_service.hpp"
#include "concierge/speech_markup.hpp"

// nlohmann::json conversions for the API envelope types.
namespace concierge {

void to_json(nlohmann::json& j, const TourPlan& plan);
void to_json(nlohmann::json& j, const TranscriptEntry& entry);
void to_json(nlohmann::json& j, const EmphasisSpan& span);
void to_json(nlohmann::json& j, const SpeechMarkup& markup);
void to_json(nlohmann::json& j, const MotionCommand& command);
void to_json(nlohmann::json& j, const CandidateCard& card);
void to_json(nlohmann::json& j, const TurnResponse& response);
void to_json(nlohmann::json& j, const MetricsReport& report);

/// Full session view as served by GET /sessions/{id}. Candidate cards are
/// included when the state shows spots.
nlohmann::json session_json(const SessionRecord& session,
                            const std::vector<CandidateCard>& cards);

}  // namespace concierge
