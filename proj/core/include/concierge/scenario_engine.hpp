#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "concierge/scenario.hpp"

namespace concierge {

struct EngineConfig {
  /// Re-search loops allowed per slot before the forced-accept fallback.
  int loop_cap = 2;
  /// User turns a self-looping state may take before it is pushed forward.
  int turn_cap = 5;
};

enum class Guard {
  None,
  BelowTurnCap,
  AtTurnCap,
  CandidatesPresent,
  BelowLoopCap,
  AtLoopCap,
};

enum class TransitionEffect {
  None,
  SelfLoop,
  /// Candidates cleared and the research loop counter incremented.
  ResearchLoop,
  /// Loop cap reached; the best-ranked candidate is taken.
  ForcedAccept,
  /// Turn cap reached; the self-loop act was promoted to the progressing act.
  TurnCap,
};

std::string_view to_string(Guard g) noexcept;
std::string_view to_string(TransitionEffect e) noexcept;
std::optional<TransitionEffect> parse_effect(std::string_view name) noexcept;

struct TransitionRule {
  ScenarioState from;
  DialogueAct act;
  ScenarioState to;
  Guard guard;
  /// Act the transition is treated as; differs from act for cap promotions.
  DialogueAct effective_act;
  TransitionEffect effect;
};

/// Rows are ordered; the first row whose guard holds wins.
std::span<const TransitionRule> transition_table() noexcept;

/// List of {from, act, to, guard} objects.
nlohmann::json transition_table_json();

struct Step {
  ScenarioState from;
  DialogueAct act;
  DialogueAct effective_act;
  ScenarioState to;
  TransitionEffect effect;

  /// True when this step fixes the slot's spot (accepted or forced).
  bool accepts_spot() const noexcept {
    return is_recommendation(from) && effective_act == DialogueAct::SpotAccepted;
  }
  bool operator==(const Step&) const = default;
};

/// The consultation flow as a finite-state machine. Stateless apart from its
/// caps, so one engine may serve any number of sessions.
class ScenarioEngine {
 public:
  explicit ScenarioEngine(EngineConfig config = {});

  static ScenarioState initial_state() noexcept { return ScenarioState::Icebreaker; }
  SessionRecord new_session(std::string session_id) const;

  /// Resolves the table row for act in the session's current state.
  /// Throws Error(InvalidAct) or Error(InvariantViolation).
  Step step(const SessionRecord& session, DialogueAct act) const;

  ScenarioState transition(ScenarioState state, DialogueAct act,
                           const SessionRecord& session) const;

  /// Counts one user turn in the current state, then applies act. chosen_id
  /// names the accepted candidate; without it the best-ranked one is taken.
  /// Entering an Introduction state leaves the slot's candidates empty: the
  /// caller owns searching.
  SessionRecord advance(SessionRecord session, DialogueAct act,
                        std::optional<std::string> chosen_id = std::nullopt) const;

  const EngineConfig& config() const noexcept { return config_; }

 private:
  EngineConfig config_;
};

/// Fixes the spot for a slot. Throws Error(DuplicateSpot), Error(NotACandidate)
/// or Error(InvariantViolation) when the second slot has no first choice.
SessionRecord record_choice(SessionRecord session, const Spot& spot, Slot slot);

}  // namespace concierge
