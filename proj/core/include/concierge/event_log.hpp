#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "concierge/scenario.hpp"

namespace concierge {

/// Append-only JSON-lines log, one file per session (<dir>/<id>.jsonl).
///
/// Every turn is written as one batch of event lines closed by a "commit"
/// line, in a single write followed by fsync. Readers ignore anything after
/// the last commit, and the next append truncates such a torn tail, so a
/// failed turn leaves the log exactly as it was. The line format is described
/// in docs/event_log.md.
class EventLog {
 public:
  /// Creates dir if needed. Throws Error(StorageError).
  explicit EventLog(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path file_for(const std::string& session_id) const;
  bool exists(const std::string& session_id) const;

  /// Starts a new log. Throws Error(StorageError) if it already exists.
  void create(const std::string& session_id, std::vector<nlohmann::json> events);
  /// Appends one committed batch. seq, session_id and turn are filled in.
  void append(const std::string& session_id, int turn, std::vector<nlohmann::json> events);

  /// Events of committed batches, commit lines removed.
  std::vector<nlohmann::json> read_committed(const std::string& session_id) const;
  std::vector<std::string> list_sessions() const;

 private:
  struct Cursor {
    std::uintmax_t committed_bytes = 0;
    std::int64_t next_seq = 0;
  };

  Cursor scan(const std::string& session_id) const;
  void write_batch(const std::string& session_id, int turn,
                   std::vector<nlohmann::json>& events, bool create);

  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, Cursor> cursors_;
};

/// Folds one event into the record. Throws Error(StorageError) when the event
/// is inconsistent with the record.
void apply_event(SessionRecord& session, const nlohmann::json& event);

/// Rebuilds a session from its committed events.
SessionRecord replay(const std::vector<nlohmann::json>& events);

/// Schema problems with one event line; empty when well formed.
std::vector<std::string> check_event_schema(const nlohmann::json& event);

nlohmann::json spot_to_json(const Spot& spot);
Spot spot_from_json(const nlohmann::json& j);

}  // namespace concierge
