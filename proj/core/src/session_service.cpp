#include "concierge/session_service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

#include "concierge/error.hpp"
#include "concierge/text.hpp"

namespace concierge {

using nlohmann::json;

namespace {

std::string hex_id(std::uint64_t hi, std::uint64_t lo) {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

bool valid_session_id(std::string_view id) {
  return !id.empty() && id.size() <= 128 &&
         std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_';
         });
}

std::string plain_reading(std::string_view reading) {
  std::string out;
  for (char c : reading) {
    if (c != '|') out.push_back(c);
  }
  return out;
}

// Candidate the user named, longest name first; nullopt if none is named.
std::optional<std::string> mentioned_candidate(std::string_view utterance,
                                               const std::vector<Spot>& candidates) {
  const auto said = text::normalize(utterance);
  std::vector<const Spot*> order;
  for (const auto& c : candidates) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(), [](const Spot* a, const Spot* b) {
    return a->name.size() > b->name.size();
  });
  for (const Spot* c : order) {
    const auto name = text::normalize(c->name);
    const auto reading = text::normalize(plain_reading(c->reading));
    if ((!name.empty() && said.find(name) != std::string::npos) ||
        (!reading.empty() && said.find(reading) != std::string::npos)) {
      return c->id;
    }
  }
  return std::nullopt;
}

json state_json(ScenarioState s) { return std::string(to_string(s)); }

}  // namespace

IdGenerator random_id_generator() {
  return [] {
    std::random_device rd;
    std::uniform_int_distribution<std::uint64_t> dist;
    return hex_id(dist(rd), dist(rd));
  };
}

IdGenerator seeded_id_generator(std::uint64_t seed) {
  struct State {
    std::mutex mu;
    std::mt19937_64 rng;
  };
  auto state = std::make_shared<State>();
  state->rng.seed(seed);
  return [state] {
    std::lock_guard lock(state->mu);
    const auto hi = state->rng();
    const auto lo = state->rng();
    return hex_id(hi, lo);
  };
}

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

SessionService::SessionService(ServiceConfig config, std::shared_ptr<const Resources> resources,
                               std::shared_ptr<GenerationBackend> backend, IdGenerator ids,
                               Clock clock)
    : config_(std::move(config)),
      resources_(std::move(resources)),
      backend_(std::move(backend)),
      ids_(ids ? std::move(ids) : random_id_generator()),
      clock_(clock ? std::move(clock) : system_clock()),
      engine_(config_.engine),
      log_(config_.storage_dir) {
  if (!resources_ || !backend_) {
    throw Error(ErrorCode::InvariantViolation, "session service needs resources and a backend");
  }
}

std::string SessionService::create_session() {
  std::string id;
  for (int i = 0; i < 8; ++i) {
    id = ids_();
    if (!log_.exists(id)) break;
  }
  auto record = engine_.new_session(id);
  log_.create(id, {json{{"type", "session_created"},
                        {"ts", clock_()},
                        {"state", state_json(record.state)},
                        {"loop_cap", config_.engine.loop_cap},
                        {"turn_cap", config_.engine.turn_cap}}});
  auto entry = std::make_shared<Entry>();
  entry->record = std::move(record);
  std::lock_guard lock(entries_mu_);
  entries_[id] = std::move(entry);
  return id;
}

std::shared_ptr<SessionService::Entry> SessionService::entry_for(const std::string& id) {
  if (!valid_session_id(id)) throw Error(ErrorCode::SessionNotFound, "no session '" + id + "'");
  std::lock_guard lock(entries_mu_);
  if (auto it = entries_.find(id); it != entries_.end()) return it->second;
  if (!log_.exists(id)) throw Error(ErrorCode::SessionNotFound, "no session '" + id + "'");
  auto entry = std::make_shared<Entry>();
  entries_[id] = entry;
  return entry;
}

SessionRecord& SessionService::load_locked(Entry& entry, const std::string& id) {
  if (!entry.record) entry.record = replay(log_.read_committed(id));
  return *entry.record;
}

SessionRecord SessionService::get_session(const std::string& id) {
  auto entry = entry_for(id);
  std::lock_guard lock(entry->mu);
  return load_locked(*entry, id);
}

std::vector<CandidateCard> SessionService::candidate_cards(const SessionRecord& s) const {
  std::vector<CandidateCard> out;
  if (!shows_spots(s.state)) return out;
  const auto slot = *slot_of(s.state);
  const auto digest = make_spot_digest(s, slot);
  const auto& cands = s.candidates_for(slot);
  for (std::size_t i = 0; i < digest.rows.size(); ++i) {
    const auto& row = digest.rows[i];
    out.push_back({row.spot_id, row.name, row.reading, row.reason, cands[i].image_ref,
                   row.top_genres, row.distance_from_first_km});
  }
  return out;
}

TurnResponse SessionService::post_user_turn(const std::string& id, std::string_view text_in) {
  auto entry = entry_for(id);
  std::lock_guard lock(entry->mu);
  SessionRecord& current = load_locked(*entry, id);
  if (current.state == ScenarioState::End) {
    throw Error(ErrorCode::SessionEnded, "session " + id + " has ended");
  }
  if (!text::is_valid_utf8(text_in)) {
    throw Error(ErrorCode::InvalidRequest, "turn text must be UTF-8");
  }
  const auto user_text = std::string(text::trim(text_in));
  if (user_text.empty()) throw Error(ErrorCode::InvalidRequest, "turn text is empty");

  const Resources& res = *resources_;
  SessionRecord work = current;
  const int turn = work.user_turn_count() + 1;
  const auto from = work.state;
  const auto slot = slot_of(from);
  std::vector<json> events;
  auto emit = [&](json ev) {
    apply_event(work, ev);
    events.push_back(std::move(ev));
  };

  emit({{"type", "user_turn"}, {"text", user_text}, {"ts", clock_()}, {"state", state_json(from)}});

  CatalogView aux;
  if (is_interview(from)) {
    aux = res.genres;
  } else if (shows_spots(from)) {
    aux = make_spot_digest(work, *slot);
  }
  const auto bundle = build_prompt(from, work, std::move(aux), config_.prompt);
  const auto out = generate(bundle, *backend_, config_.generation);
  emit({{"type", "act"},
        {"state", state_json(from)},
        {"act", std::string(to_string(out.act))},
        {"fallback", out.fallback},
        {"attempts", out.attempts}});

  const Step st = engine_.step(work, out.act);

  if (is_interview(from) && is_introduction(st.to)) {
    auto keywords = extract_keywords(work, *slot, *backend_, res.lexicon, res.genres,
                                     config_.generation);
    emit({{"type", "keywords"}, {"slot", std::string(to_string(*slot))}, {"keywords", keywords}});

    SearchQuery query{keywords, {}};
    const auto& rejected = work.rejected_ids[index_of(*slot)];
    query.exclude_ids.insert(rejected.begin(), rejected.end());
    if (*slot == Slot::Second && work.first_choice) {
      query.exclude_ids.insert(work.first_choice->id);
    }
    auto found = res.catalog.search(query);
    const bool fallback = found.empty();
    if (fallback) {
      // Nothing matched: offer the first unexcluded spots by id.
      std::vector<const Spot*> all;
      for (const auto& s : res.catalog.spots()) all.push_back(&s);
      std::sort(all.begin(), all.end(),
                [](const Spot* a, const Spot* b) { return a->id < b->id; });
      for (const Spot* s : all) {
        if (found.size() == kMaxCandidates) break;
        if (!query.exclude_ids.count(s->id)) found.push_back(*s);
      }
    }
    if (found.empty()) {
      throw Error(ErrorCode::InvariantViolation, "catalog has no spot left to offer");
    }
    json cands = json::array();
    for (const auto& s : found) cands.push_back(spot_to_json(s));
    emit({{"type", "search"},
          {"slot", std::string(to_string(*slot))},
          {"keywords", keywords},
          {"exclude", std::vector<std::string>(query.exclude_ids.begin(), query.exclude_ids.end())},
          {"candidates", std::move(cands)},
          {"fallback", fallback}});
  }

  if (st.accepts_spot()) {
    const auto& cands = work.candidates_for(*slot);
    std::string pick = cands.front().id;
    if (st.effect != TransitionEffect::ForcedAccept) {
      if (auto named = mentioned_candidate(user_text, cands)) pick = *named;
    }
    emit({{"type", "choice"},
          {"slot", std::string(to_string(*slot))},
          {"spot_id", pick},
          {"forced", st.effect == TransitionEffect::ForcedAccept}});
  }

  emit({{"type", "system_turn"},
        {"text", out.response_text},
        {"ts", clock_()},
        {"state", state_json(from)}});
  emit({{"type", "transition"},
        {"from", state_json(st.from)},
        {"act", std::string(to_string(st.act))},
        {"effective_act", std::string(to_string(st.effective_act))},
        {"to", state_json(st.to)},
        {"effect", std::string(to_string(st.effect))}});

  std::vector<MotionCommand> motions;
  auto add = [&](const DialogueEvent& ev) {
    for (const auto& m : direct(ev, st.to, res.greetings, res.motion)) motions.push_back(m);
  };
  add(DialogueEvent::user_speech_started());
  add(DialogueEvent::system_utterance(out.response_text));
  const auto ids_of = [](const std::vector<Spot>& v) {
    std::vector<std::string> ids;
    for (const auto& s : v) ids.push_back(s.id);
    return ids;
  };
  if (shows_spots(from) && !shows_spots(st.to)) add(DialogueEvent::images_hidden());
  if (shows_spots(st.to)) {
    const auto to_slot = *slot_of(st.to);
    if (!shows_spots(from) ||
        ids_of(current.candidates_for(to_slot)) != ids_of(work.candidates_for(to_slot))) {
      add(DialogueEvent::images_displayed());
    }
  }
  for (const auto& m : motions) {
    emit({{"type", "motion"},
          {"kind", std::string(to_string(m.kind))},
          {"at_ms", m.at_ms},
          {"duration_ms", m.duration_ms}});
  }

  log_.append(id, turn, std::move(events));
  current = std::move(work);

  TurnResponse r;
  r.session_id = id;
  r.turn = turn;
  r.system_text = out.response_text;
  r.act = out.act;
  r.fallback = out.fallback;
  r.markup = annotate(out.response_text, res.catalog.spots(), res.persons, res.profile);
  r.markup_document = render(r.markup, res.profile);
  r.motions = std::move(motions);
  r.state = current.state;
  r.candidates = candidate_cards(current);
  if (current.state == ScenarioState::Closing || current.state == ScenarioState::End) {
    r.plan = current.plan;
  }
  return r;
}

MetricsReport SessionService::metrics(std::optional<double> threshold_km) const {
  return compute_metrics(config_.storage_dir, threshold_km.value_or(config_.threshold_km));
}

MetricsReport compute_metrics(const std::filesystem::path& store, double threshold_km) {
  std::error_code ec;
  if (!std::filesystem::is_directory(store, ec)) {
    throw Error(ErrorCode::StorageError, "log store " + store.string() + " is not a directory");
  }
  EventLog log(store);
  MetricsReport report;
  report.threshold_km = threshold_km;
  for (const auto& id : log.list_sessions()) {
    const auto events = log.read_committed(id);
    if (events.empty()) continue;
    const auto s = replay(events);
    ++report.sessions_total;
    const bool planned = s.state == ScenarioState::End && s.plan_confirmed && s.plan;
    if (!planned) continue;
    ++report.sessions_with_plan;
    if (feasible(*s.plan, threshold_km)) ++report.sessions_feasible;
  }
  report.plan_rate = report.sessions_total == 0
                         ? 0.0
                         : static_cast<double>(report.sessions_feasible) /
                               static_cast<double>(report.sessions_total);
  return report;
}

}  // namespace concierge
