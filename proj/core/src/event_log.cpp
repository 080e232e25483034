#include "concierge/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <system_error>

#include "concierge/error.hpp"
#include "concierge/motion_director.hpp"
#include "concierge/scenario_engine.hpp"

namespace concierge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kSuffix = ".jsonl";

[[noreturn]] void storage_error(const std::string& what) {
  throw Error(ErrorCode::StorageError, what);
}

void write_all(const fs::path& path, const std::string& bytes, bool create) {
  int flags = O_WRONLY | O_APPEND | O_CLOEXEC;
  if (create) flags |= O_CREAT | O_EXCL;
  const int fd = ::open(path.c_str(), flags, 0644);
  if (fd < 0) storage_error("open " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = std::strerror(errno);
      ::close(fd);
      storage_error("write " + path.string() + ": " + err);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    storage_error("fsync " + path.string() + ": " + err);
  }
  ::close(fd);
}

Slot slot_field(const json& ev) {
  const auto s = ev.at("slot").get<std::string>();
  if (s == "first") return Slot::First;
  if (s == "second") return Slot::Second;
  storage_error("bad slot '" + s + "'");
}

ScenarioState state_field(const json& ev, const char* key) {
  const auto name = ev.at(key).get<std::string>();
  auto s = parse_state(name);
  if (!s) storage_error("unknown state '" + name + "'");
  return *s;
}

DialogueAct act_field(const json& ev, const char* key) {
  const auto name = ev.at(key).get<std::string>();
  auto a = parse_act(name);
  if (!a) storage_error("unknown act '" + name + "'");
  return *a;
}

}  // namespace

json spot_to_json(const Spot& s) {
  return {{"id", s.id},           {"name", s.name},
          {"reading", s.reading}, {"genres", s.genres},
          {"description", s.description}, {"image_ref", s.image_ref},
          {"lat", s.lat},         {"lon", s.lon}};
}

Spot spot_from_json(const json& j) {
  Spot s;
  s.id = j.at("id").get<std::string>();
  s.name = j.at("name").get<std::string>();
  s.reading = j.at("reading").get<std::string>();
  s.genres = j.at("genres").get<std::vector<std::string>>();
  s.description = j.value("description", std::string{});
  s.image_ref = j.value("image_ref", std::string{});
  s.lat = j.at("lat").get<double>();
  s.lon = j.at("lon").get<double>();
  return s;
}

EventLog::EventLog(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    storage_error("cannot use storage directory " + dir_.string() +
                  (ec ? ": " + ec.message() : ""));
  }
}

fs::path EventLog::file_for(const std::string& session_id) const {
  return dir_ / (session_id + std::string(kSuffix));
}

bool EventLog::exists(const std::string& session_id) const {
  std::error_code ec;
  return fs::is_regular_file(file_for(session_id), ec);
}

EventLog::Cursor EventLog::scan(const std::string& session_id) const {
  std::ifstream in(file_for(session_id), std::ios::binary);
  if (!in) storage_error("cannot read log for session " + session_id);
  Cursor c;
  std::uintmax_t offset = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: torn write
    offset += line.size() + 1;
    json ev = json::parse(line, nullptr, false);
    if (ev.is_discarded() || !ev.is_object()) break;
    if (ev.value("type", "") == "commit") {
      c.committed_bytes = offset;
      c.next_seq = ev.value("seq", std::int64_t{0}) + 1;
    }
  }
  return c;
}

void EventLog::write_batch(const std::string& session_id, int turn,
                           std::vector<json>& events, bool create) {
  std::lock_guard lock(mu_);
  const auto path = file_for(session_id);
  Cursor cursor;
  if (create) {
    if (exists(session_id)) storage_error("session log already exists: " + path.string());
  } else {
    auto it = cursors_.find(session_id);
    cursor = it != cursors_.end() ? it->second : scan(session_id);
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) storage_error("stat " + path.string() + ": " + ec.message());
    if (size != cursor.committed_bytes) {
      fs::resize_file(path, cursor.committed_bytes, ec);
      if (ec) storage_error("truncate " + path.string() + ": " + ec.message());
    }
  }

  std::string bytes;
  auto seq = cursor.next_seq;
  for (auto& ev : events) {
    ev["seq"] = seq++;
    ev["session_id"] = session_id;
    ev["turn"] = turn;
    bytes += ev.dump();
    bytes += '\n';
  }
  json commit = {{"seq", seq++},
                 {"type", "commit"},
                 {"session_id", session_id},
                 {"turn", turn},
                 {"events", events.size()}};
  bytes += commit.dump();
  bytes += '\n';

  write_all(path, bytes, create);
  cursors_[session_id] = Cursor{cursor.committed_bytes + bytes.size(), seq};
}

void EventLog::create(const std::string& session_id, std::vector<json> events) {
  write_batch(session_id, 0, events, true);
}

void EventLog::append(const std::string& session_id, int turn, std::vector<json> events) {
  if (!exists(session_id)) storage_error("no log for session " + session_id);
  write_batch(session_id, turn, events, false);
}

std::vector<json> EventLog::read_committed(const std::string& session_id) const {
  std::ifstream in(file_for(session_id), std::ios::binary);
  if (!in) storage_error("cannot read log for session " + session_id);
  std::vector<json> out;
  std::vector<json> pending;
  std::string line;
  while (std::getline(in, line)) {
    if (in.eof()) break;
    json ev = json::parse(line, nullptr, false);
    if (ev.is_discarded() || !ev.is_object()) break;
    if (ev.value("type", "") == "commit") {
      for (auto& p : pending) out.push_back(std::move(p));
      pending.clear();
    } else {
      pending.push_back(std::move(ev));
    }
  }
  return out;
}

std::vector<std::string> EventLog::list_sessions() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == kSuffix) out.push_back(p.stem().string());
  }
  if (ec) storage_error("cannot list " + dir_.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

void apply_event(SessionRecord& s, const json& ev) {
  try {
    const auto type = ev.at("type").get<std::string>();
    if (type == "session_created") {
      s = SessionRecord{};
      s.session_id = ev.at("session_id").get<std::string>();
      s.state = state_field(ev, "state");
    } else if (type == "user_turn" || type == "system_turn") {
      TranscriptEntry e;
      e.speaker = type == "user_turn" ? Speaker::User : Speaker::System;
      e.text = ev.at("text").get<std::string>();
      e.timestamp_ms = ev.at("ts").get<std::int64_t>();
      e.state = state_field(ev, "state");
      if (e.state != s.state) storage_error("turn recorded in a different state");
      s.transcript.push_back(std::move(e));
      if (type == "user_turn") s.interview_turns += 1;
    } else if (type == "keywords") {
      s.keywords[index_of(slot_field(ev))] = ev.at("keywords").get<std::vector<std::string>>();
    } else if (type == "search") {
      auto& cands = s.candidates[index_of(slot_field(ev))];
      cands.clear();
      for (const auto& c : ev.at("candidates")) cands.push_back(spot_from_json(c));
    } else if (type == "choice") {
      const auto slot = slot_field(ev);
      const auto id = ev.at("spot_id").get<std::string>();
      const auto& cands = s.candidates_for(slot);
      auto it = std::find_if(cands.begin(), cands.end(),
                             [&](const Spot& c) { return c.id == id; });
      if (it == cands.end()) storage_error("choice of non-candidate " + id);
      s = record_choice(std::move(s), Spot(*it), slot);
    } else if (type == "transition") {
      const auto from = state_field(ev, "from");
      const auto to = state_field(ev, "to");
      if (from != s.state) storage_error("transition from a state the session is not in");
      const auto effect = parse_effect(ev.at("effect").get<std::string>());
      if (!effect) storage_error("unknown effect");
      if (*effect == TransitionEffect::ResearchLoop) {
        const auto slot = slot_of(from);
        if (!slot) storage_error("research loop outside a slot");
        auto& cands = s.candidates[index_of(*slot)];
        for (const auto& c : cands) s.rejected_ids[index_of(*slot)].push_back(c.id);
        cands.clear();
        s.research_loops[index_of(*slot)] += 1;
      }
      if (act_field(ev, "effective_act") == DialogueAct::PlanConfirmed) s.plan_confirmed = true;
      if (to != from) s.interview_turns = 0;
      s.state = to;
    } else if (type == "act" || type == "motion") {
      // informational
    } else {
      storage_error("unknown event type '" + type + "'");
    }
  } catch (const json::exception& e) {
    storage_error(std::string("malformed event: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StorageError) throw;
    storage_error(std::string("event rejected on replay: ") + e.what());
  }
}

SessionRecord replay(const std::vector<json>& events) {
  SessionRecord s;
  if (events.empty() || events.front().value("type", "") != "session_created") {
    storage_error("log does not start with session_created");
  }
  for (const auto& ev : events) apply_event(s, ev);
  return s;
}

std::vector<std::string> check_event_schema(const json& ev) {
  std::vector<std::string> out;
  if (!ev.is_object()) return {"event is not an object"};
  auto need = [&](const char* key, auto pred, const char* what) {
    if (!ev.contains(key) || !pred(ev[key])) {
      out.push_back(std::string("'") + key + "' must be " + what);
    }
  };
  auto is_str = [](const json& v) { return v.is_string(); };
  auto is_int = [](const json& v) { return v.is_number_integer(); };
  auto is_bool = [](const json& v) { return v.is_boolean(); };
  auto is_state = [](const json& v) {
    return v.is_string() && parse_state(v.get<std::string>()).has_value();
  };
  auto is_act = [](const json& v) {
    return v.is_string() && parse_act(v.get<std::string>()).has_value();
  };
  auto is_slot = [](const json& v) {
    return v.is_string() && (v == "first" || v == "second");
  };
  auto is_str_array = [](const json& v) {
    return v.is_array() &&
           std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_string(); });
  };

  need("seq", is_int, "an integer");
  need("session_id", is_str, "a string");
  need("turn", is_int, "an integer");
  need("type", is_str, "a string");
  if (!ev.contains("type") || !ev["type"].is_string()) return out;
  const auto type = ev["type"].get<std::string>();
  if (type == "session_created") {
    need("ts", is_int, "an integer");
    need("state", is_state, "a state name");
  } else if (type == "user_turn" || type == "system_turn") {
    need("text", is_str, "a string");
    need("ts", is_int, "an integer");
    need("state", is_state, "a state name");
  } else if (type == "act") {
    need("state", is_state, "a state name");
    need("act", is_act, "an act label");
    need("fallback", is_bool, "a boolean");
    need("attempts", is_int, "an integer");
  } else if (type == "keywords") {
    need("slot", is_slot, "first|second");
    need("keywords", is_str_array, "an array of strings");
  } else if (type == "search") {
    need("slot", is_slot, "first|second");
    need("keywords", is_str_array, "an array of strings");
    need("exclude", is_str_array, "an array of strings");
    need("fallback", is_bool, "a boolean");
    if (!ev.contains("candidates") || !ev["candidates"].is_array() ||
        ev["candidates"].size() > kMaxCandidates) {
      out.push_back("'candidates' must be an array of at most 3 spots");
    } else {
      for (const auto& c : ev["candidates"]) {
        try {
          (void)spot_from_json(c);
        } catch (const json::exception&) {
          out.push_back("'candidates' holds a malformed spot");
          break;
        }
      }
    }
  } else if (type == "choice") {
    need("slot", is_slot, "first|second");
    need("spot_id", is_str, "a string");
    need("forced", is_bool, "a boolean");
  } else if (type == "transition") {
    need("from", is_state, "a state name");
    need("to", is_state, "a state name");
    need("act", is_act, "an act label");
    need("effective_act", is_act, "an act label");
    need("effect", [](const json& v) {
      return v.is_string() && parse_effect(v.get<std::string>()).has_value();
    }, "a transition effect");
  } else if (type == "motion") {
    need("kind", [](const json& v) {
      return v.is_string() && parse_motion(v.get<std::string>()).has_value();
    }, "a motion kind");
    need("at_ms", is_int, "an integer");
    need("duration_ms", [](const json& v) {
      return v.is_number_integer() && v.get<int>() > 0;
    }, "a positive integer");
  } else if (type == "commit") {
    need("events", is_int, "an integer");
  } else {
    out.push_back("unknown type '" + type + "'");
  }
  return out;
}

}  // namespace concierge
