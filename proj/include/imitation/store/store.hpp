#pragma once

#include "imitation/session/engine.hpp"
#include "imitation/store/registry.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace imitation::store {

// Everything known about one session. While a session is open only the log is
// durable; closing writes the summary (outcomes, warnings, status).
struct SessionRecord {
  std::string session_id;
  std::string participant_id;
  std::int64_t started_at = 0;  // caller-supplied, typically Unix ms
  session::RubricConfig config;
  session::SessionStatus status = session::SessionStatus::Running;
  std::vector<session::StampedEvent> log;
  std::vector<session::PhaseOutcome> outcomes;
  std::optional<session::PhaseOutcome> imitation_aggregate;
  std::vector<std::string> warnings;
  std::int64_t duration_ms = 0;  // engine clock at close

  bool mirroring_triggered() const;
  // Phase kind name ("pairing", ...) the Abort command arrived in, if aborted.
  std::optional<std::string> aborted_in() const;

  bool operator==(const SessionRecord&) const = default;
};

SessionRecord record_from_state(const session::SessionState& state, std::int64_t started_at,
                                std::vector<std::string> warnings);

// Replays the record's log through the engine and reports whether the stored
// outcomes, aggregate and status are reproduced exactly.
bool replay_consistent(const SessionRecord& record);

nlohmann::json summary_json(const SessionRecord& record);

// Directory layout:
//   index.json            participants and the session list
//   sessions/<id>.jsonl   append-only event log, one {seq,t_ms,phase,payload} per line
//   sessions/<id>.json    summary written when the session closes
//
// Appends are flushed and fsync'd before returning. The index is replaced
// atomically (write to a temporary, then rename). A session whose summary is
// missing after a restart is reported as still open; its outcomes are rebuilt
// by replaying its log.
class SessionStore {
 public:
  // Creates the directory structure if needed. Throws Error(Io) or
  // Error(MalformedJson) for an unreadable index.
  explicit SessionStore(std::filesystem::path root);
  ~SessionStore();
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  const std::filesystem::path& root() const { return root_; }

  // Throws Error(DuplicateId).
  void register_participant(const ParticipantProfile& profile);
  const ParticipantRegistry& registry() const { return registry_; }

  // Opens a new session and returns its id ("<participant>-<nnn>").
  // Throws Error(UnknownParticipant) and Error(InvalidConfig).
  std::string create_session(const std::string& participant_id, const session::RubricConfig& config,
                             std::int64_t started_at = 0);

  // Durable append. Throws Error(UnknownSession), Error(SessionClosed).
  void append_event(const std::string& session_id, const session::StampedEvent& event);
  void add_warning(const std::string& session_id, const std::string& text);

  // Writes the summary and closes the log. The record's log must equal what was
  // appended (missing tail events are appended first).
  void close_session(const SessionRecord& record);

  bool is_open(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  // Throws Error(UnknownSession).
  SessionRecord load(const std::string& session_id) const;
  std::vector<SessionRecord> load_all() const;

 private:
  struct OpenSession;
  struct IndexEntry {
    std::string id;
    std::string participant_id;
    std::int64_t started_at = 0;
    session::RubricConfig config;
  };

  void write_index() const;
  std::filesystem::path log_path(const std::string& id) const;
  std::filesystem::path summary_path(const std::string& id) const;
  OpenSession& open_session(const std::string& id);

  std::filesystem::path root_;
  ParticipantRegistry registry_;
  std::vector<IndexEntry> sessions_;
  std::map<std::string, std::unique_ptr<OpenSession>> open_;
};

// Reads a session log; a torn final line (crash during append) is ignored,
// any other malformed line raises Error(MalformedJson).
std::vector<session::StampedEvent> read_log(const std::filesystem::path& path);

}  // namespace imitation::store
