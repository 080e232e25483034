#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "concierge/backend.hpp"
#include "concierge/resources.hpp"
#include "concierge/scenario.hpp"
#include "concierge/session_service.hpp"

namespace concierge::cli {

/// A simulated traveller: what they say in each state and how likely each
/// dialogue act is. State keys are state names; "*" is the default.
struct Persona {
  std::string name;
  std::map<ScenarioState, std::vector<std::pair<DialogueAct, double>>> acts;
  std::vector<std::vector<std::string>> keywords;
  std::map<std::string, std::vector<std::string>> utterances;

  static Persona from_json(const nlohmann::json& doc);
};

/// Problems in a persona document; empty when usable.
std::vector<std::string> validate_persona(const nlohmann::json& doc);

/// Accepts a path, or a bare name looked up as <data_dir>/personas/<name>.json.
Persona load_persona(const std::string& name_or_path, const std::filesystem::path& data_dir);

/// Backend that samples acts from a persona's distribution with a seeded RNG.
class PersonaBackend : public GenerationBackend {
 public:
  PersonaBackend(Persona persona, std::uint64_t seed);
  std::string complete(const BackendRequest& request) override;

 private:
  std::mutex mu_;
  Persona persona_;
  std::mt19937_64 rng_;
};

struct SimulationOptions {
  int runs = 100;
  std::uint64_t seed = 0;
  /// Safety bound; a session still open after this many turns is abandoned.
  int max_turns = 200;
};

struct SimulationResult {
  MetricsReport metrics;
  int abandoned = 0;
  int total_turns = 0;
};

/// Runs `runs` persona sessions against a fresh service writing to store.
SimulationResult simulate(const Persona& persona, std::shared_ptr<const Resources> resources,
                          ServiceConfig config, const SimulationOptions& options);

}  // namespace concierge::cli
