#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "concierge/backend.hpp"
#include "concierge/event_log.hpp"
#include "concierge/generation.hpp"
#include "concierge/motion_director.hpp"
#include "concierge/resources.hpp"
#include "concierge/scenario_engine.hpp"
#include "concierge/speech_markup.hpp"

namespace concierge {

struct ServiceConfig {
  std::filesystem::path storage_dir = "sessions";
  EngineConfig engine;
  PromptOptions prompt;
  GenerateOptions generation;
  double threshold_km = kDefaultFeasibleKm;
};

/// What a client needs to draw one candidate spot.
struct CandidateCard {
  std::string id;
  std::string name;
  std::string reading;
  std::string reason;
  std::string image_ref;
  std::vector<std::string> genres;
  std::optional<double> distance_from_first_km;

  bool operator==(const CandidateCard&) const = default;
};

struct TurnResponse {
  std::string session_id;
  int turn = 0;
  std::string system_text;
  DialogueAct act = DialogueAct::ChatContinue;
  bool fallback = false;
  SpeechMarkup markup;
  std::string markup_document;
  std::vector<MotionCommand> motions;
  /// Post-turn state; always equal to the persisted state.
  ScenarioState state = ScenarioState::Icebreaker;
  /// Non-empty exactly when state shows spots.
  std::vector<CandidateCard> candidates;
  /// Present exactly when state is Closing or End.
  std::optional<TourPlan> plan;
};

/// Plan-rate proxy: a session counts when it ended through PlanConfirmed and
/// its two spots lie within threshold_km of each other.
struct MetricsReport {
  std::size_t sessions_total = 0;
  std::size_t sessions_with_plan = 0;
  std::size_t sessions_feasible = 0;
  double plan_rate = 0.0;
  double threshold_km = kDefaultFeasibleKm;

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport compute_metrics(const std::filesystem::path& store, double threshold_km);

using IdGenerator = std::function<std::string()>;
/// Milliseconds since the epoch.
using Clock = std::function<std::int64_t()>;

/// 32 hex digits from std::random_device.
IdGenerator random_id_generator();
/// Reproducible ids for tests and seeded simulations.
IdGenerator seeded_id_generator(std::uint64_t seed);
Clock system_clock();

/// Runs turns for many sessions. Requests for one session are serialized: a
/// second concurrent request waits for the first to finish.
class SessionService {
 public:
  SessionService(ServiceConfig config, std::shared_ptr<const Resources> resources,
                 std::shared_ptr<GenerationBackend> backend, IdGenerator ids = {},
                 Clock clock = {});

  /// Throws Error(StorageError).
  std::string create_session();

  /// generate -> search/choice -> transition -> persist -> markup -> motions.
  /// Throws Error(SessionNotFound), Error(SessionEnded), Error(InvalidRequest)
  /// for blank text, Error(BackendUnavailable) or Error(StorageError); on any
  /// error nothing is persisted and the session is unchanged.
  TurnResponse post_user_turn(const std::string& session_id, std::string_view text);

  /// Loads from the log when the session is not in memory.
  SessionRecord get_session(const std::string& session_id);

  std::vector<CandidateCard> candidate_cards(const SessionRecord& session) const;

  MetricsReport metrics(std::optional<double> threshold_km = std::nullopt) const;

  const ServiceConfig& config() const noexcept { return config_; }
  const Resources& resources() const noexcept { return *resources_; }
  const ScenarioEngine& engine() const noexcept { return engine_; }

 private:
  struct Entry {
    std::mutex mu;
    std::optional<SessionRecord> record;
  };

  std::shared_ptr<Entry> entry_for(const std::string& session_id);
  SessionRecord& load_locked(Entry& entry, const std::string& session_id);

  ServiceConfig config_;
  std::shared_ptr<const Resources> resources_;
  std::shared_ptr<GenerationBackend> backend_;
  IdGenerator ids_;
  Clock clock_;
  ScenarioEngine engine_;
  EventLog log_;

  std::mutex entries_mu_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

}  // namespace concierge
