#pragma once

#include "imitation/store/store.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imitation::store {

// One line of the per-session results table. Codes a session never reached
// are empty.
struct ReportRow {
  std::string participant_id;
  std::string session_id;
  std::optional<session::Code> greetings;
  std::optional<session::Code> pairing;
  std::optional<session::Code> imitation;
  bool with_objects = false;
  bool mirroring_triggered = false;
  std::int64_t duration_ms = 0;
  std::size_t warnings = 0;
  session::SessionStatus status = session::SessionStatus::Completed;
  std::string comment;
};

ReportRow report_row(const SessionRecord& record);
std::vector<ReportRow> report(std::span<const SessionRecord> records);

// "F | 3 | 3 | 3a | imitation without objects"
std::string compact_row(const ReportRow& row);
// Column-aligned table with a header line, every comment field included.
std::string render_table(std::span<const ReportRow> rows);
nlohmann::json report_json(std::span<const ReportRow> rows);

}  // namespace imitation::store
