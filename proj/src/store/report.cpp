#include "imitation/store/report.hpp"

#include <algorithm>
#include <sstream>

namespace imitation::store {

using nlohmann::json;
using session::Code;

namespace {

std::string code_text(const std::optional<Code>& c) {
  return c ? std::string(session::code_name(*c)) : std::string();
}

std::string primary_comment(const ReportRow& row, const SessionRecord& record) {
  if (row.status == session::SessionStatus::Aborted) {
    return "aborted in " + record.aborted_in().value_or("unknown");
  }
  if (row.status == session::SessionStatus::Running) return "session still open";
  if (!row.imitation) return "no imitation scored";
  switch (*row.imitation) {
    case Code::C3a:
    case Code::C2a: return row.with_objects ? "imitation with objects" : "imitation without objects";
    case Code::C1a: return "no imitation attempt";
    case Code::C3b: return "recognition of being imitated";
    case Code::C2b: return "interest in being imitated";
    case Code::C1b: return "no reaction to being imitated";
    default: return "";
  }
}

std::string duration_text(std::int64_t ms) {
  std::ostringstream os;
  os << ms / 60000 << 'm' << (ms / 1000) % 60 << 's';
  return os.str();
}

}  // namespace

ReportRow report_row(const SessionRecord& record) {
  ReportRow row;
  row.participant_id = record.participant_id;
  row.session_id = record.session_id;
  for (const auto& o : record.outcomes) {
    if (o.phase == session::PhaseKind::Greetings) row.greetings = o.code;
    if (o.phase == session::PhaseKind::Pairing) row.pairing = o.code;
    if (o.phase == session::PhaseKind::Imitation) row.with_objects = row.with_objects || o.with_objects;
  }
  if (record.imitation_aggregate) row.imitation = record.imitation_aggregate->code;
  row.mirroring_triggered = record.mirroring_triggered();
  row.duration_ms = record.duration_ms;
  row.warnings = record.warnings.size();
  row.status = record.status;
  row.comment = primary_comment(row, record);
  return row;
}

std::vector<ReportRow> report(std::span<const SessionRecord> records) {
  std::vector<ReportRow> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(report_row(r));
  return rows;
}

std::string compact_row(const ReportRow& row) {
  return row.participant_id + " | " + code_text(row.greetings) + " | " + code_text(row.pairing) +
         " | " + code_text(row.imitation) + " | " + row.comment;
}

std::string render_table(std::span<const ReportRow> rows) {
  const std::vector<std::string> header = {"participant", "session",   "greetings", "pairing",
                                           "imitation",   "objects",   "mirroring", "duration",
                                           "warnings",    "status",    "comment"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  for (const auto& r : rows) {
    cells.push_back({r.participant_id, r.session_id, code_text(r.greetings), code_text(r.pairing),
                     code_text(r.imitation), r.with_objects ? "yes" : "no",
                     r.mirroring_triggered ? "yes" : "no", duration_text(r.duration_ms),
                     std::to_string(r.warnings), std::string(session::status_name(r.status)),
                     r.comment});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      text += line[c];
      if (c + 1 < line.size()) text += std::string(width[c] - line[c].size() + 2, ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    os << text << '\n';
  }
  return os.str();
}

json report_json(std::span<const ReportRow> rows) {
  json out = json::array();
  const auto code = [](const std::optional<Code>& c) {
    return c ? json(std::string(session::code_name(*c))) : json(nullptr);
  };
  for (const auto& r : rows) {
    out.push_back({{"participant_id", r.participant_id},
                   {"session_id", r.session_id},
                   {"greetings", code(r.greetings)},
                   {"pairing", code(r.pairing)},
                   {"imitation", code(r.imitation)},
                   {"with_objects", r.with_objects},
                   {"mirroring_triggered", r.mirroring_triggered},
                   {"duration_ms", r.duration_ms},
                   {"warnings", r.warnings},
                   {"status", session::status_name(r.status)},
                   {"comment", r.comment}});
  }
  return {{"rows", std::move(out)}};
}

}  // namespace imitation::store
