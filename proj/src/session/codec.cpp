#include "imitation/session/codec.hpp"

#include "imitation/error.hpp"

namespace imitation::session {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedJson, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) malformed(std::string("expected an object holding \"") + key + "\"");
  const auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing \"") + key + "\"");
  return *it;
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    malformed(std::string("bad \"") + key + "\": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key);
}

template <typename E, typename F>
E enum_field(const json& j, const char* key, F&& from_name) {
  const auto name = get<std::string>(j, key);
  const std::optional<E> v = from_name(name);
  if (!v) malformed(std::string("unknown ") + key + " '" + name + "'");
  return *v;
}

}  // namespace

scene::Role role_from_name(std::string_view name) {
  for (const auto r : {scene::Role::Unassigned, scene::Role::Participant, scene::Role::Model}) {
    if (scene::role_name(r) == name) return r;
  }
  malformed("unknown role '" + std::string(name) + "'");
}

json to_json(const gesture::MatchResult& r) {
  json times = json::array();
  for (const auto& t : r.keyframe_times) times.push_back(t ? json(*t) : json(nullptr));
  return {{"status", gesture::status_name(r.status)},
          {"chirality", gesture::chirality_name(r.chirality)},
          {"keyframe_times", std::move(times)},
          {"best_similarity", r.best_similarity},
          {"keyframes_matched", r.keyframes_matched},
          {"energy", r.energy},
          {"unscoreable_fraction", r.unscoreable_fraction}};
}

gesture::MatchResult match_result_from_json(const json& j) {
  gesture::MatchResult r;
  r.status = enum_field<gesture::MatchStatus>(
      j, "status", [](const std::string& n) { return gesture::status_from_name(n); });
  r.chirality = enum_field<gesture::Chirality>(
      j, "chirality", [](const std::string& n) { return gesture::chirality_from_name(n); });
  const auto& times = get_or<json>(j, "keyframe_times", json::array());
  if (!times.is_array()) malformed("keyframe_times must be an array");
  for (const auto& t : times) {
    if (t.is_null()) {
      r.keyframe_times.emplace_back();
    } else if (t.is_number_integer()) {
      r.keyframe_times.emplace_back(t.get<std::int64_t>());
    } else {
      malformed("keyframe time must be an integer or null");
    }
  }
  r.best_similarity = get_or<std::vector<double>>(j, "best_similarity", {});
  r.keyframes_matched = get_or<int>(j, "keyframes_matched", 0);
  r.energy = get_or<double>(j, "energy", 0.0);
  r.unscoreable_fraction = get_or<double>(j, "unscoreable_fraction", 0.0);
  return r;
}

json to_json(const gesture::MotionStats& s) {
  return {{"window_ms", s.window_ms},
          {"energy", s.energy},
          {"rhythm_period_ms", s.rhythm_period_ms ? json(*s.rhythm_period_ms) : json(nullptr)}};
}

gesture::MotionStats motion_stats_from_json(const json& j) {
  gesture::MotionStats s;
  s.window_ms = get_or<std::int64_t>(j, "window_ms", 0);
  s.energy = get_or<double>(j, "energy", 0.0);
  if (j.contains("rhythm_period_ms") && !j.at("rhythm_period_ms").is_null()) {
    s.rhythm_period_ms = get<double>(j, "rhythm_period_ms");
  }
  return s;
}

json to_json(const Command& c) {
  json j = {{"type", "command"}, {"kind", command_name(c.kind)}};
  if (c.kind == CommandKind::AssignRole) {
    j["track"] = c.track ? json(*c.track) : json(nullptr);
    j["role"] = scene::role_name(c.role);
  }
  return j;
}

Command command_from_json(const json& j) {
  Command c;
  c.kind = enum_field<CommandKind>(j, "kind", [](const std::string& n) { return command_from_name(n); });
  if (j.contains("track") && !j.at("track").is_null()) c.track = get<scene::TrackId>(j, "track");
  if (j.contains("role")) c.role = role_from_name(get<std::string>(j, "role"));
  return c;
}

json to_json(const Payload& p) {
  return std::visit(
      [](const auto& v) -> json {
        using P = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<P, OperatorObservation>) {
          return {{"type", "observation"}, {"kind", observation_name(v.kind)}};
        } else if constexpr (std::is_same_v<P, GestureMatched>) {
          return {{"type", "gesture_matched"}, {"movement", v.movement}, {"result", to_json(v.result)}};
        } else if constexpr (std::is_same_v<P, GestureFailed>) {
          return {{"type", "gesture_failed"}, {"movement", v.movement}, {"result", to_json(v.result)}};
        } else if constexpr (std::is_same_v<P, ActivityChange>) {
          return {{"type", "activity_change"}, {"stats", to_json(v.stats)}};
        } else if constexpr (std::is_same_v<P, Command>) {
          return to_json(v);
        } else {
          return {{"type", "tick"}};
        }
      },
      p);
}

Payload payload_from_json(const json& j) {
  const auto type = get<std::string>(j, "type");
  if (type == "observation") {
    return OperatorObservation{enum_field<Observation>(
        j, "kind", [](const std::string& n) { return observation_from_name(n); })};
  }
  if (type == "gesture_matched") {
    return GestureMatched{get<int>(j, "movement"), match_result_from_json(field(j, "result"))};
  }
  if (type == "gesture_failed") {
    return GestureFailed{get<int>(j, "movement"), match_result_from_json(field(j, "result"))};
  }
  if (type == "activity_change") return ActivityChange{motion_stats_from_json(field(j, "stats"))};
  if (type == "command") return command_from_json(j);
  if (type == "tick") return ClockTick{};
  malformed("unknown payload type '" + type + "'");
}

json to_json(const StampedEvent& e) {
  return {{"seq", e.seq}, {"t_ms", e.timestamp_ms}, {"phase", e.phase}, {"payload", to_json(e.payload)}};
}

StampedEvent stamped_event_from_json(const json& j) {
  StampedEvent e;
  e.seq = get<std::uint64_t>(j, "seq");
  e.timestamp_ms = get<std::int64_t>(j, "t_ms");
  e.phase = get<std::string>(j, "phase");
  e.payload = payload_from_json(field(j, "payload"));
  return e;
}

json to_json(const Phase& p) {
  json j = {{"kind", phase_kind_name(p.kind)}, {"entered_at", p.entered_at}, {"label", phase_label(p)}};
  if (p.kind == PhaseKind::Imitation) {
    j["movement"] = p.movement;
    j["mode"] = mode_name(p.mode);
    j["with_objects"] = p.with_objects;
  }
  return j;
}

Phase phase_from_json(const json& j) {
  Phase p;
  p.kind = enum_field<PhaseKind>(j, "kind", [](const std::string& n) { return phase_kind_from_name(n); });
  p.entered_at = get_or<std::int64_t>(j, "entered_at", 0);
  p.movement = get_or<int>(j, "movement", 0);
  p.with_objects = get_or<bool>(j, "with_objects", false);
  const auto mode = get_or<std::string>(j, "mode", "demonstrate");
  if (mode == "demonstrate") {
    p.mode = ImitationMode::Demonstrate;
  } else if (mode == "mirroring") {
    p.mode = ImitationMode::Mirroring;
  } else {
    malformed("unknown mode '" + mode + "'");
  }
  return p;
}

json to_json(const PhaseOutcome& o) {
  return {{"phase", phase_kind_name(o.phase)}, {"movement", o.movement},
          {"code", code_name(o.code)},         {"evidence", o.evidence},
          {"with_objects", o.with_objects},    {"decided_at", o.decided_at}};
}

PhaseOutcome outcome_from_json(const json& j) {
  PhaseOutcome o;
  o.phase = enum_field<PhaseKind>(j, "phase", [](const std::string& n) { return phase_kind_from_name(n); });
  o.movement = get_or<int>(j, "movement", -1);
  o.code = enum_field<Code>(j, "code", [](const std::string& n) { return code_from_name(n); });
  o.evidence = get_or<std::vector<std::uint64_t>>(j, "evidence", {});
  o.with_objects = get_or<bool>(j, "with_objects", false);
  o.decided_at = get_or<std::int64_t>(j, "decided_at", 0);
  return o;
}

json to_json(const RubricConfig& c) {
  return {{"wait_window_ms", c.wait_window_ms},
          {"imitation_window_ms", c.imitation_window_ms},
          {"mirroring_window_ms", c.mirroring_window_ms},
          {"movement_count", c.movement_count},
          {"greetings_smile_counts", c.greetings_smile_counts},
          {"greetings_head_counts", c.greetings_head_counts},
          {"pairing_smile_counts", c.pairing_smile_counts},
          {"pairing_head_counts", c.pairing_head_counts},
          {"mirroring_attention_counts", c.mirroring_attention_counts}};
}

RubricConfig rubric_from_json(const json& j) {
  RubricConfig c;
  c.wait_window_ms = get_or(j, "wait_window_ms", c.wait_window_ms);
  c.imitation_window_ms = get_or(j, "imitation_window_ms", c.imitation_window_ms);
  c.mirroring_window_ms = get_or(j, "mirroring_window_ms", c.mirroring_window_ms);
  c.movement_count = get_or(j, "movement_count", c.movement_count);
  c.greetings_smile_counts = get_or(j, "greetings_smile_counts", c.greetings_smile_counts);
  c.greetings_head_counts = get_or(j, "greetings_head_counts", c.greetings_head_counts);
  c.pairing_smile_counts = get_or(j, "pairing_smile_counts", c.pairing_smile_counts);
  c.pairing_head_counts = get_or(j, "pairing_head_counts", c.pairing_head_counts);
  c.mirroring_attention_counts = get_or(j, "mirroring_attention_counts", c.mirroring_attention_counts);
  validate(c);
  return c;
}

json to_json(const EngineOutput& o) {
  return std::visit(
      [](const auto& v) -> json {
        using O = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<O, PhaseChanged>) {
          return {{"type", "phase_changed"}, {"from", to_json(v.from)}, {"to", to_json(v.to)}};
        } else if constexpr (std::is_same_v<O, WindowArmed>) {
          return {{"type", "window_armed"}, {"opened_at", v.opened_at}, {"deadline", v.deadline}};
        } else if constexpr (std::is_same_v<O, OutcomeEmitted>) {
          return {{"type", "outcome"}, {"aggregate", v.aggregate}, {"outcome", to_json(v.outcome)}};
        } else if constexpr (std::is_same_v<O, MirroringActive>) {
          return {{"type", "mirroring"}, {"active", v.active}, {"movement", v.movement}};
        } else if constexpr (std::is_same_v<O, Suggestion>) {
          return {{"type", "suggestion"}, {"text", v.text}, {"stats", to_json(v.stats)}};
        } else if constexpr (std::is_same_v<O, Warning>) {
          return {{"type", "warning"}, {"text", v.text}};
        } else if constexpr (std::is_same_v<O, RoleAssignment>) {
          return {{"type", "role_assignment"}, {"track", v.track}, {"role", scene::role_name(v.role)}};
        } else {
          return {{"type", "session_ended"}, {"status", status_name(v.status)}};
        }
      },
      o);
}

}  // namespace imitation::session
