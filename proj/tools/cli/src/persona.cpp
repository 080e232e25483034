#include "concierge_cli/persona.hpp"

#include <fstream>

#include "concierge/error.hpp"

namespace concierge::cli {

using nlohmann::json;

std::vector<std::string> validate_persona(const json& doc) {
  std::vector<std::string> out;
  if (!doc.is_object()) return {"persona must be a JSON object"};
  if (!doc.contains("acts") || !doc["acts"].is_object()) {
    out.push_back("'acts' must be an object of state -> {act: weight}");
  } else {
    for (const auto& [state_name, dist] : doc["acts"].items()) {
      const auto state = parse_state(state_name);
      if (!state) {
        out.push_back("acts: unknown state '" + state_name + "'");
        continue;
      }
      if (!dist.is_object() || dist.empty()) {
        out.push_back("acts." + state_name + ": must be a non-empty object");
        continue;
      }
      double total = 0.0;
      for (const auto& [act_name, weight] : dist.items()) {
        const auto act = parse_act(act_name);
        if (!act || !accepts(*state, *act)) {
          out.push_back("acts." + state_name + ": '" + act_name + "' is not accepted there");
        }
        if (!weight.is_number() || weight.get<double>() < 0.0) {
          out.push_back("acts." + state_name + "." + act_name + ": weight must be >= 0");
        } else {
          total += weight.get<double>();
        }
      }
      if (total <= 0.0) out.push_back("acts." + state_name + ": weights sum to zero");
    }
  }
  if (doc.contains("keywords")) {
    const auto& k = doc["keywords"];
    bool ok = k.is_array();
    if (ok) {
      for (const auto& set : k) {
        if (!set.is_array() || set.empty()) ok = false;
        else
          for (const auto& w : set) ok = ok && w.is_string();
      }
    }
    if (!ok) out.push_back("'keywords' must be an array of non-empty string arrays");
  }
  if (doc.contains("utterances")) {
    const auto& u = doc["utterances"];
    if (!u.is_object()) {
      out.push_back("'utterances' must be an object");
    } else {
      for (const auto& [key, list] : u.items()) {
        if (key != "*" && !parse_state(key)) out.push_back("utterances: unknown state '" + key + "'");
        bool ok = list.is_array() && !list.empty();
        if (ok)
          for (const auto& s : list) ok = ok && s.is_string() && !s.get<std::string>().empty();
        if (!ok) out.push_back("utterances." + key + ": must be a non-empty string array");
      }
    }
  }
  return out;
}

Persona Persona::from_json(const json& doc) {
  if (auto problems = validate_persona(doc); !problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw Error(ErrorCode::SchemaError, msg);
  }
  Persona p;
  p.name = doc.value("name", std::string("persona"));
  for (const auto& [state_name, dist] : doc["acts"].items()) {
    auto& row = p.acts[*parse_state(state_name)];
    for (const auto& [act_name, weight] : dist.items()) {
      row.emplace_back(*parse_act(act_name), weight.get<double>());
    }
  }
  if (doc.contains("keywords")) p.keywords = doc["keywords"].get<std::vector<std::vector<std::string>>>();
  if (doc.contains("utterances")) {
    p.utterances = doc["utterances"].get<std::map<std::string, std::vector<std::string>>>();
  }
  return p;
}

Persona load_persona(const std::string& name_or_path, const std::filesystem::path& data_dir) {
  std::filesystem::path path(name_or_path);
  if (!std::filesystem::exists(path)) path = data_dir / "personas" / (name_or_path + ".json");
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidRequest, "no persona file for '" + name_or_path + "'");
  try {
    return Persona::from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

PersonaBackend::PersonaBackend(Persona persona, std::uint64_t seed)
    : persona_(std::move(persona)), rng_(seed) {}

std::string PersonaBackend::complete(const BackendRequest& request) {
  std::lock_guard lock(mu_);
  const auto slash = request.key.find('/');
  const auto state = parse_state(request.key.substr(0, slash));
  if (request.key.size() >= 9 && request.key.compare(request.key.size() - 9, 9, "/keywords") == 0) {
    if (persona_.keywords.empty()) return "";
    std::uniform_int_distribution<std::size_t> pick(0, persona_.keywords.size() - 1);
    std::string line = "KEYWORDS: ";
    const auto& set = persona_.keywords[pick(rng_)];
    for (std::size_t i = 0; i < set.size(); ++i) line += (i ? ", " : "") + set[i];
    return line;
  }
  if (!state) return "";
  auto it = persona_.acts.find(*state);
  if (it == persona_.acts.end()) return "";
  std::vector<double> weights;
  for (const auto& [act, w] : it->second) weights.push_back(w);
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  const auto act = it->second[dist(rng_)].first;
  return "RESPONSE: " + std::string(to_string(*state)) + "のご案内です。\nACT: " +
         std::string(to_string(act));
}

SimulationResult simulate(const Persona& persona, std::shared_ptr<const Resources> resources,
                          ServiceConfig config, const SimulationOptions& options) {
  auto backend = std::make_shared<PersonaBackend>(persona, options.seed);
  SessionService service(std::move(config), std::move(resources), backend,
                         seeded_id_generator(options.seed ^ 0x9e3779b97f4a7c15ULL),
                         [] { return std::int64_t{0}; });
  std::mt19937_64 rng(options.seed + 1);
  SimulationResult result;
  for (int run = 0; run < options.runs; ++run) {
    const auto id = service.create_session();
    auto state = ScenarioState::Icebreaker;
    int turns = 0;
    while (state != ScenarioState::End && turns < options.max_turns) {
      const std::vector<std::string>* pool = nullptr;
      if (auto it = persona.utterances.find(std::string(to_string(state)));
          it != persona.utterances.end()) {
        pool = &it->second;
      } else if (auto star = persona.utterances.find("*"); star != persona.utterances.end()) {
        pool = &star->second;
      }
      std::string text = "はい。";
      if (pool) {
        std::uniform_int_distribution<std::size_t> pick(0, pool->size() - 1);
        text = (*pool)[pick(rng)];
      }
      state = service.post_user_turn(id, text).state;
      ++turns;
    }
    result.total_turns += turns;
    if (state != ScenarioState::End) ++result.abandoned;
  }
  result.metrics = service.metrics();
  return result;
}

}  // namespace concierge::cli
