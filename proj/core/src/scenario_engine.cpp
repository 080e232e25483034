#include "concierge/scenario_engine.hpp"

#include <algorithm>
#include <array>

#include "concierge/error.hpp"

namespace concierge {

namespace {

using S = ScenarioState;
using A = DialogueAct;
using G = Guard;
using E = TransitionEffect;

constexpr TransitionRule rule(S from, A act, S to, G guard = G::None,
                              E effect = E::None) {
  return {from, act, to, guard, act, effect};
}

constexpr TransitionRule promoted(S from, A act, S to, G guard, A effective, E effect) {
  return {from, act, to, guard, effective, effect};
}

// Interview-to-introduction chain for one slot.
#define CONCIERGE_SLOT_RULES(INTERVIEW, INTRO, RECO, RESEARCH, NEXT)              \
  rule(S::INTERVIEW, A::AskMore, S::INTERVIEW, G::BelowTurnCap, E::SelfLoop),      \
      promoted(S::INTERVIEW, A::AskMore, S::INTRO, G::AtTurnCap,                   \
               A::RequirementsComplete, E::TurnCap),                               \
      rule(S::INTERVIEW, A::RequirementsComplete, S::INTRO),                       \
      rule(S::INTRO, A::IntroDelivered, S::RECO),                                  \
      rule(S::RECO, A::SpotDiscuss, S::RECO, G::BelowTurnCap, E::SelfLoop),        \
      promoted(S::RECO, A::SpotDiscuss, S::NEXT, G::AtTurnCap, A::SpotAccepted,    \
               E::TurnCap),                                                        \
      rule(S::RECO, A::SpotAccepted, S::NEXT, G::CandidatesPresent),               \
      rule(S::RECO, A::AllSpotsRejected, S::RESEARCH, G::BelowLoopCap,             \
           E::ResearchLoop),                                                       \
      promoted(S::RECO, A::AllSpotsRejected, S::NEXT, G::AtLoopCap,                \
               A::SpotAccepted, E::ForcedAccept),                                  \
      rule(S::RESEARCH, A::AskMore, S::RESEARCH, G::BelowTurnCap, E::SelfLoop),    \
      promoted(S::RESEARCH, A::AskMore, S::INTRO, G::AtTurnCap,                    \
               A::RequirementsComplete, E::TurnCap),                               \
      rule(S::RESEARCH, A::RequirementsComplete, S::INTRO)

constexpr std::array kTable = {
    rule(S::Icebreaker, A::ChatContinue, S::Icebreaker, G::BelowTurnCap, E::SelfLoop),
    promoted(S::Icebreaker, A::ChatContinue, S::Interview1, G::AtTurnCap, A::ChatDone,
             E::TurnCap),
    rule(S::Icebreaker, A::ChatDone, S::Interview1),
    CONCIERGE_SLOT_RULES(Interview1, Introduction1, Recommendation1, ResearchInterview1,
                         Interview2),
    CONCIERGE_SLOT_RULES(Interview2, Introduction2, Recommendation2, ResearchInterview2,
                         Closing),
    rule(S::Closing, A::PlanConfirmed, S::End),
    rule(S::Closing, A::Farewell, S::End),
};

#undef CONCIERGE_SLOT_RULES

bool guard_holds(Guard g, const SessionRecord& s, const EngineConfig& cfg) {
  const auto slot = slot_of(s.state);
  switch (g) {
    case G::None:
      return true;
    case G::BelowTurnCap:
      return s.interview_turns < cfg.turn_cap;
    case G::AtTurnCap:
      return s.interview_turns >= cfg.turn_cap;
    case G::CandidatesPresent:
      return slot && !s.candidates_for(*slot).empty();
    case G::BelowLoopCap:
      return slot && s.research_loops[index_of(*slot)] < cfg.loop_cap;
    case G::AtLoopCap:
      return slot && s.research_loops[index_of(*slot)] >= cfg.loop_cap;
  }
  return false;
}

}  // namespace

std::string_view to_string(Guard g) noexcept {
  switch (g) {
    case G::None: return "";
    case G::BelowTurnCap: return "turns_in_state < turn_cap";
    case G::AtTurnCap: return "turns_in_state >= turn_cap";
    case G::CandidatesPresent: return "candidates non-empty";
    case G::BelowLoopCap: return "research_loops < loop_cap";
    case G::AtLoopCap: return "research_loops >= loop_cap";
  }
  return "";
}

std::string_view to_string(TransitionEffect e) noexcept {
  switch (e) {
    case E::None: return "none";
    case E::SelfLoop: return "self_loop";
    case E::ResearchLoop: return "research_loop";
    case E::ForcedAccept: return "forced_accept";
    case E::TurnCap: return "turn_cap";
  }
  return "none";
}

std::optional<TransitionEffect> parse_effect(std::string_view name) noexcept {
  for (auto e : {E::None, E::SelfLoop, E::ResearchLoop, E::ForcedAccept, E::TurnCap}) {
    if (to_string(e) == name) return e;
  }
  return std::nullopt;
}

std::span<const TransitionRule> transition_table() noexcept { return kTable; }

nlohmann::json transition_table_json() {
  auto out = nlohmann::json::array();
  for (const auto& r : kTable) {
    out.push_back({{"from", to_string(r.from)},
                   {"act", to_string(r.act)},
                   {"to", to_string(r.to)},
                   {"guard", to_string(r.guard)}});
  }
  return out;
}

ScenarioEngine::ScenarioEngine(EngineConfig config) : config_(config) {
  if (config_.loop_cap < 0 || config_.turn_cap < 1) {
    throw Error(ErrorCode::InvariantViolation, "loop_cap must be >= 0 and turn_cap >= 1");
  }
}

SessionRecord ScenarioEngine::new_session(std::string session_id) const {
  SessionRecord s;
  s.session_id = std::move(session_id);
  s.state = initial_state();
  return s;
}

Step ScenarioEngine::step(const SessionRecord& session, DialogueAct act) const {
  const auto state = session.state;
  if (!accepts(state, act)) {
    throw Error(ErrorCode::InvalidAct, std::string(to_string(act)) +
                                           " is not accepted in " +
                                           std::string(to_string(state)));
  }
  for (const auto& r : kTable) {
    if (r.from != state || r.act != act) continue;
    if (!guard_holds(r.guard, session, config_)) continue;
    Step out{state, act, r.effective_act, r.to, r.effect};
    if (out.accepts_spot()) {
      if (session.candidates_for(*slot_of(state)).empty()) {
        throw Error(ErrorCode::InvariantViolation,
                    "spot accepted in " + std::string(to_string(state)) +
                        " with no candidates");
      }
    }
    return out;
  }
  // Only SpotAccepted with empty candidates falls through every row.
  throw Error(ErrorCode::InvariantViolation,
              std::string(to_string(act)) + " in " + std::string(to_string(state)) +
                  " with no candidates");
}

ScenarioState ScenarioEngine::transition(ScenarioState state, DialogueAct act,
                                         const SessionRecord& session) const {
  SessionRecord view = session;
  view.state = state;
  return step(view, act).to;
}

SessionRecord ScenarioEngine::advance(SessionRecord session, DialogueAct act,
                                      std::optional<std::string> chosen_id) const {
  session.interview_turns += 1;
  const Step st = step(session, act);
  const auto slot = slot_of(st.from);

  if (st.effect == E::ResearchLoop) {
    auto& cands = session.candidates[index_of(*slot)];
    auto& rejected = session.rejected_ids[index_of(*slot)];
    for (const auto& c : cands) rejected.push_back(c.id);
    cands.clear();
    session.research_loops[index_of(*slot)] += 1;
  }
  if (st.accepts_spot()) {
    const auto& cands = session.candidates_for(*slot);
    const Spot* pick = &cands.front();
    if (chosen_id && st.effect != E::ForcedAccept) {
      auto it = std::find_if(cands.begin(), cands.end(),
                             [&](const Spot& s) { return s.id == *chosen_id; });
      if (it == cands.end()) {
        throw Error(ErrorCode::NotACandidate, *chosen_id + " is not a candidate");
      }
      pick = &*it;
    }
    session = record_choice(std::move(session), Spot(*pick), *slot);
  }
  if (st.effective_act == A::PlanConfirmed) session.plan_confirmed = true;
  if (st.to != st.from) session.interview_turns = 0;
  session.state = st.to;
  return session;
}

SessionRecord record_choice(SessionRecord session, const Spot& spot, Slot slot) {
  if (slot == Slot::Second) {
    if (!session.first_choice) {
      throw Error(ErrorCode::InvariantViolation, "second spot chosen before the first");
    }
    if (session.first_choice->id == spot.id) {
      throw Error(ErrorCode::DuplicateSpot, spot.id + " is already the first spot");
    }
  }
  const auto& cands = session.candidates_for(slot);
  if (std::none_of(cands.begin(), cands.end(),
                   [&](const Spot& c) { return c.id == spot.id; })) {
    throw Error(ErrorCode::NotACandidate,
                spot.id + " is not a " + std::string(to_string(slot)) + "-slot candidate");
  }
  if (slot == Slot::First) {
    session.first_choice = spot;
  } else {
    session.plan = TourPlan{*session.first_choice, spot,
                            distance(*session.first_choice, spot)};
  }
  return session;
}

}  // namespace concierge
