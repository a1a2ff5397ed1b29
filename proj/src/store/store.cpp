#include "imitation/store/store.hpp"

#include "imitation/error.hpp"
#include "imitation/session/codec.hpp"
#include "imitation/store/codec.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace imitation::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void io_error(const std::string& what) {
  throw Error(Errc::Io, what + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("write " + path.string());
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

// Temporary file + fsync + rename, so readers see either the old or the new
// document.
void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_error("open " + tmp.string());
  write_all(fd, text, tmp);
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_error("fsync " + tmp.string());
  }
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "rename " + tmp.string() + ": " + ec.message());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::MalformedJson, path.string() + " is not valid JSON");
  return j;
}

}  // namespace

bool SessionRecord::mirroring_triggered() const {
  for (const auto& o : outcomes) {
    if (o.phase == session::PhaseKind::Imitation &&
        session::code_legal_for(o.code, session::PhaseKind::Imitation,
                                session::ImitationMode::Mirroring)) {
      return true;
    }
  }
  for (const auto& e : log) {
    if (e.phase.find(":mirroring") != std::string::npos) return true;
  }
  return false;
}

std::optional<std::string> SessionRecord::aborted_in() const {
  if (status != session::SessionStatus::Aborted) return std::nullopt;
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    const auto* c = std::get_if<session::Command>(&it->payload);
    if (c != nullptr && c->kind == session::CommandKind::Abort) {
      return it->phase.substr(0, it->phase.find(':'));
    }
  }
  return std::string("unknown");
}

SessionRecord record_from_state(const session::SessionState& state, std::int64_t started_at,
                                std::vector<std::string> warnings) {
  SessionRecord r;
  r.session_id = state.session_id;
  r.participant_id = state.participant_id;
  r.started_at = started_at;
  r.config = state.config;
  r.status = state.status;
  r.log = state.log;
  r.outcomes = state.outcomes;
  r.imitation_aggregate = state.imitation_aggregate;
  r.warnings = std::move(warnings);
  r.duration_ms = state.clock;
  return r;
}

bool replay_consistent(const SessionRecord& record) {
  const auto replayed =
      session::replay(record.session_id, record.participant_id, record.config, record.log);
  const auto dump = [](const std::vector<session::PhaseOutcome>& outcomes,
                       const std::optional<session::PhaseOutcome>& aggregate) {
    json j = json::array();
    for (const auto& o : outcomes) j.push_back(session::to_json(o));
    if (aggregate) j.push_back(session::to_json(*aggregate));
    return j.dump();
  };
  return dump(replayed.outcomes, replayed.imitation_aggregate) ==
             dump(record.outcomes, record.imitation_aggregate) &&
         replayed.status == record.status && replayed.log == record.log;
}

json summary_json(const SessionRecord& r) {
  json outcomes = json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(session::to_json(o));
  return {{"session_id", r.session_id},
          {"participant_id", r.participant_id},
          {"started_at", r.started_at},
          {"config", session::to_json(r.config)},
          {"status", session::status_name(r.status)},
          {"outcomes", std::move(outcomes)},
          {"imitation_aggregate",
           r.imitation_aggregate ? session::to_json(*r.imitation_aggregate) : json(nullptr)},
          {"warnings", r.warnings},
          {"duration_ms", r.duration_ms},
          {"event_count", r.log.size()}};
}

std::vector<session::StampedEvent> read_log(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::vector<session::StampedEvent> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const bool complete = !in.eof();
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (!complete) break;  // torn final append
      throw Error(Errc::MalformedJson, path.string() + ":" + std::to_string(number) + " is not JSON");
    }
    try {
      out.push_back(session::stamped_event_from_json(j));
    } catch (const Error& e) {
      throw Error(Errc::MalformedJson, path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

namespace {

// Cuts an unterminated final line left by a crash mid-append, so that the
// next append starts on a fresh line.
void drop_torn_tail(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.empty() || content.back() == '\n') return;
  const auto last = content.find_last_of('\n');
  in.close();
  fs::resize_file(path, last == std::string::npos ? 0 : last + 1);
}

}  // namespace

struct SessionStore::OpenSession {
  int fd = -1;
  std::size_t appended = 0;
  std::vector<std::string> warnings;

  ~OpenSession() {
    if (fd >= 0) ::close(fd);
  }
};

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "sessions", ec);
  if (ec) throw Error(Errc::Io, "cannot create " + (root_ / "sessions").string() + ": " + ec.message());
  const auto index = root_ / "index.json";
  if (!fs::exists(index)) {
    write_index();
    return;
  }
  const json j = read_json(index);
  try {
    for (const auto& p : j.at("participants")) registry_.register_participant(profile_from_json(p));
    for (const auto& s : j.at("sessions")) {
      IndexEntry e;
      e.id = s.at("id").get<std::string>();
      e.participant_id = s.at("participant_id").get<std::string>();
      e.started_at = s.value("started_at", std::int64_t{0});
      e.config = session::rubric_from_json(s.value("config", json::object()));
      sessions_.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedJson, index.string() + ": " + e.what());
  }
}

SessionStore::~SessionStore() = default;

void SessionStore::write_index() const {
  json participants = json::array();
  for (const auto& p : registry_.all()) participants.push_back(to_json(p));
  json sessions = json::array();
  for (const auto& s : sessions_) {
    sessions.push_back({{"id", s.id},
                        {"participant_id", s.participant_id},
                        {"started_at", s.started_at},
                        {"config", session::to_json(s.config)}});
  }
  json index = {{"participants", std::move(participants)}, {"sessions", std::move(sessions)}};
  write_atomically(root_ / "index.json", index.dump(2) + "\n");
}

fs::path SessionStore::log_path(const std::string& id) const { return root_ / "sessions" / (id + ".jsonl"); }
fs::path SessionStore::summary_path(const std::string& id) const {
  return root_ / "sessions" / (id + ".json");
}

void SessionStore::register_participant(const ParticipantProfile& profile) {
  registry_.register_participant(profile);
  write_index();
}

std::string SessionStore::create_session(const std::string& participant_id,
                                         const session::RubricConfig& config, std::int64_t started_at) {
  if (!registry_.contains(participant_id)) throw Error(Errc::UnknownParticipant, participant_id);
  session::validate(config);
  int n = 0;
  for (const auto& s : sessions_) {
    if (s.participant_id == participant_id) ++n;
  }
  std::string id;
  do {
    std::ostringstream os;
    os << participant_id << '-' << std::setw(3) << std::setfill('0') << ++n;
    id = os.str();
  } while (std::any_of(sessions_.begin(), sessions_.end(), [&](const IndexEntry& e) { return e.id == id; }));

  sessions_.push_back({id, participant_id, started_at, config});
  auto open = std::make_unique<OpenSession>();
  open->fd = ::open(log_path(id).c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (open->fd < 0) io_error("open " + log_path(id).string());
  open_[id] = std::move(open);
  write_index();
  return id;
}

bool SessionStore::is_open(const std::string& id) const {
  const bool known = std::any_of(sessions_.begin(), sessions_.end(),
                                 [&](const IndexEntry& e) { return e.id == id; });
  return known && !fs::exists(summary_path(id));
}

SessionStore::OpenSession& SessionStore::open_session(const std::string& id) {
  const bool known = std::any_of(sessions_.begin(), sessions_.end(),
                                 [&](const IndexEntry& e) { return e.id == id; });
  if (!known) throw Error(Errc::UnknownSession, id);
  if (fs::exists(summary_path(id))) throw Error(Errc::SessionClosed, id);
  auto& slot = open_[id];
  if (!slot) {
    // Reopened after a restart: continue the existing log.
    slot = std::make_unique<OpenSession>();
    if (fs::exists(log_path(id))) {
      drop_torn_tail(log_path(id));
      slot->appended = read_log(log_path(id)).size();
    }
    slot->fd = ::open(log_path(id).c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (slot->fd < 0) io_error("open " + log_path(id).string());
  }
  return *slot;
}

void SessionStore::append_event(const std::string& id, const session::StampedEvent& event) {
  auto& s = open_session(id);
  const std::string line = session::to_json(event).dump() + "\n";
  write_all(s.fd, line, log_path(id));
  if (::fdatasync(s.fd) != 0) io_error("fsync " + log_path(id).string());
  ++s.appended;
}

void SessionStore::add_warning(const std::string& id, const std::string& text) {
  open_session(id).warnings.push_back(text);
}

void SessionStore::close_session(const SessionRecord& record) {
  if (record.status == session::SessionStatus::Running) {
    throw Error(Errc::InvalidConfig, "cannot close a running session; abort it first");
  }
  auto& s = open_session(record.session_id);
  for (std::size_t i = s.appended; i < record.log.size(); ++i) {
    append_event(record.session_id, record.log[i]);
  }
  SessionRecord final_record = record;
  for (const auto& w : s.warnings) {
    if (std::find(final_record.warnings.begin(), final_record.warnings.end(), w) ==
        final_record.warnings.end()) {
      final_record.warnings.push_back(w);
    }
  }
  write_atomically(summary_path(record.session_id), summary_json(final_record).dump(2) + "\n");
  open_.erase(record.session_id);
}

std::vector<std::string> SessionStore::session_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : sessions_) ids.push_back(s.id);
  return ids;
}

SessionRecord SessionStore::load(const std::string& id) const {
  const auto it = std::find_if(sessions_.begin(), sessions_.end(),
                               [&](const IndexEntry& e) { return e.id == id; });
  if (it == sessions_.end()) throw Error(Errc::UnknownSession, id);

  SessionRecord r;
  r.session_id = id;
  r.participant_id = it->participant_id;
  r.started_at = it->started_at;
  r.config = it->config;
  if (fs::exists(log_path(id))) r.log = read_log(log_path(id));

  if (!fs::exists(summary_path(id))) {
    const auto state = session::replay(id, r.participant_id, r.config, r.log);
    r.status = session::SessionStatus::Running;
    r.outcomes = state.outcomes;
    r.imitation_aggregate = state.imitation_aggregate;
    r.duration_ms = state.clock;
    return r;
  }
  const json j = read_json(summary_path(id));
  try {
    const auto status = j.at("status").get<std::string>();
    for (const auto s : {session::SessionStatus::Running, session::SessionStatus::Completed,
                         session::SessionStatus::Aborted}) {
      if (session::status_name(s) == status) r.status = s;
    }
    for (const auto& o : j.at("outcomes")) r.outcomes.push_back(session::outcome_from_json(o));
    if (!j.at("imitation_aggregate").is_null()) {
      r.imitation_aggregate = session::outcome_from_json(j.at("imitation_aggregate"));
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    r.duration_ms = j.at("duration_ms").get<std::int64_t>();
    r.config = session::rubric_from_json(j.at("config"));
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedJson, summary_path(id).string() + ": " + e.what());
  }
  return r;
}

std::vector<SessionRecord> SessionStore::load_all() const {
  std::vector<SessionRecord> out;
  for (const auto& s : sessions_) out.push_back(load(s.id));
  return out;
}

}  // namespace imitation::store
