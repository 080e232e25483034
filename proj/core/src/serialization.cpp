#include "concierge/serialization.hpp"

#include "concierge/event_log.hpp"

namespace concierge {

using nlohmann::json;

void to_json(json& j, const TourPlan& plan) {
  j = {{"first_spot", spot_to_json(plan.first_spot)},
       {"second_spot", spot_to_json(plan.second_spot)},
       {"inter_spot_distance_km", plan.inter_spot_distance_km}};
}

void to_json(json& j, const TranscriptEntry& e) {
  j = {{"speaker", to_string(e.speaker)},
       {"text", e.text},
       {"timestamp_ms", e.timestamp_ms},
       {"state", to_string(e.state)}};
}

void to_json(json& j, const EmphasisSpan& s) {
  j = {{"start", s.start},
       {"end", s.end},
       {"level", s.level},
       {"category", to_string(s.category)},
       {"volume_delta", s.volume_delta},
       {"rate_factor", s.rate_factor},
       {"pause_before_ms", s.pause_before_ms},
       {"pause_after_ms", s.pause_after_ms}};
  if (s.phonetic) j["phonetic"] = *s.phonetic;
}

void to_json(json& j, const SpeechMarkup& m) {
  j = {{"plain_text", m.plain_text}, {"spans", m.spans}};
}

void to_json(json& j, const MotionCommand& c) {
  j = {{"kind", to_string(c.kind)}, {"at_ms", c.at_ms}, {"duration_ms", c.duration_ms}};
}

void to_json(json& j, const CandidateCard& c) {
  j = {{"id", c.id},       {"name", c.name},           {"reading", c.reading},
       {"reason", c.reason}, {"image_ref", c.image_ref}, {"genres", c.genres}};
  if (c.distance_from_first_km) j["distance_from_first_km"] = *c.distance_from_first_km;
}

void to_json(json& j, const TurnResponse& r) {
  j = {{"session_id", r.session_id},
       {"turn", r.turn},
       {"system_text", r.system_text},
       {"act", to_string(r.act)},
       {"fallback", r.fallback},
       {"markup", r.markup},
       {"markup_document", r.markup_document},
       {"motions", r.motions},
       {"state", to_string(r.state)},
       {"candidates", r.candidates},
       {"plan", r.plan ? json(*r.plan) : json(nullptr)}};
}

void to_json(json& j, const MetricsReport& m) {
  j = {{"sessions_total", m.sessions_total},
       {"sessions_with_plan", m.sessions_with_plan},
       {"sessions_feasible", m.sessions_feasible},
       {"plan_rate", m.plan_rate},
       {"threshold_km", m.threshold_km},
       {"feasibility", "proxy: inter-spot straight-line distance <= threshold_km"}};
}

json session_json(const SessionRecord& s, const std::vector<CandidateCard>& cards) {
  json slots = json::array();
  for (auto slot : {Slot::First, Slot::Second}) {
    json cands = json::array();
    for (const auto& c : s.candidates_for(slot)) cands.push_back(spot_to_json(c));
    slots.push_back({{"slot", to_string(slot)},
                     {"keywords", s.keywords[index_of(slot)]},
                     {"candidates", std::move(cands)},
                     {"rejected_ids", s.rejected_ids[index_of(slot)]},
                     {"research_loops", s.research_loops[index_of(slot)]}});
  }
  return {{"session_id", s.session_id},
          {"state", to_string(s.state)},
          {"transcript", s.transcript},
          {"slots", std::move(slots)},
          {"first_choice", s.first_choice ? spot_to_json(*s.first_choice) : json(nullptr)},
          {"plan", s.plan ? json(*s.plan) : json(nullptr)},
          {"plan_confirmed", s.plan_confirmed},
          {"interview_turns", s.interview_turns},
          {"candidates", cards}};
}

}  // namespace concierge
