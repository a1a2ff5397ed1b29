#include "imitation/io/scenario.hpp"

#include "imitation/error.hpp"
#include "imitation/session/codec.hpp"
#include "imitation/store/codec.hpp"

#include <fstream>

namespace imitation::io {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidScript, what); }

std::vector<scene::Limb> limbs_from_json(const json& j) {
  std::vector<scene::Limb> out;
  if (!j.is_array()) invalid("limbs must be an array of names");
  for (const auto& name : j) {
    scene::Limb l{};
    if (!name.is_string() || !scene::limb_from_name(name.get<std::string>(), l)) {
      invalid("unknown limb " + name.dump());
    }
    out.push_back(l);
  }
  return out;
}

json limbs_to_json(const std::vector<scene::Limb>& limbs) {
  json out = json::array();
  for (const auto l : limbs) out.push_back(scene::limb_name(l));
  return out;
}

Action action_from_json(const json& e) {
  const auto kind = e.value("action", std::string());
  if (kind == "perform") {
    Perform p;
    p.gesture = e.at("gesture").get<std::string>();
    const auto chirality = e.value("chirality", std::string("direct"));
    const auto c = gesture::chirality_from_name(chirality);
    if (!c) invalid("unknown chirality '" + chirality + "'");
    p.chirality = *c;
    p.sigma = e.value("sigma", 0.0);
    p.speed = e.value("speed", 1.0);
    if (e.contains("limbs")) p.limbs = limbs_from_json(e.at("limbs"));
    if (!(p.speed > 0.0) || p.sigma < 0.0) invalid("perform needs speed > 0 and sigma >= 0");
    return p;
  }
  if (kind == "idle") {
    Idle i;
    i.sigma = e.value("sigma", i.sigma);
    i.bounce_hz = e.value("bounce_hz", 0.0);
    i.bounce_amplitude = e.value("bounce_amplitude", 0.0);
    if (i.sigma < 0.0 || i.bounce_hz < 0.0) invalid("idle needs sigma >= 0 and bounce_hz >= 0");
    return i;
  }
  if (kind == "hide") return Hide{limbs_from_json(e.at("limbs"))};
  if (kind == "show") return Show{limbs_from_json(e.at("limbs"))};
  if (kind == "observe") {
    const auto name = e.at("kind").get<std::string>();
    const auto o = session::observation_from_name(name);
    if (!o) invalid("unknown observation '" + name + "'");
    return Observe{*o};
  }
  if (kind == "command") {
    try {
      return IssueCommand{session::command_from_json(e)};
    } catch (const Error& err) {
      invalid(err.what());
    }
  }
  if (kind == "false_positive") {
    FalsePositive f;
    f.height_ratio = e.value("height_ratio", f.height_ratio);
    f.x = e.value("x", f.x);
    f.y = e.value("y", f.y);
    if (e.contains("duration_ms")) f.duration_ms = e.at("duration_ms").get<std::int64_t>();
    if (!(f.height_ratio > 0.0)) invalid("false_positive needs height_ratio > 0");
    return f;
  }
  invalid("unknown action '" + kind + "'");
}

json action_to_json(const Action& a) {
  return std::visit(
      [](const auto& v) -> json {
        using A = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<A, Perform>) {
          json j = {{"action", "perform"},
                    {"gesture", v.gesture},
                    {"chirality", gesture::chirality_name(v.chirality)},
                    {"sigma", v.sigma},
                    {"speed", v.speed}};
          if (!v.limbs.empty()) j["limbs"] = limbs_to_json(v.limbs);
          return j;
        } else if constexpr (std::is_same_v<A, Idle>) {
          return {{"action", "idle"},
                  {"sigma", v.sigma},
                  {"bounce_hz", v.bounce_hz},
                  {"bounce_amplitude", v.bounce_amplitude}};
        } else if constexpr (std::is_same_v<A, Hide>) {
          return {{"action", "hide"}, {"limbs", limbs_to_json(v.limbs)}};
        } else if constexpr (std::is_same_v<A, Show>) {
          return {{"action", "show"}, {"limbs", limbs_to_json(v.limbs)}};
        } else if constexpr (std::is_same_v<A, Observe>) {
          return {{"action", "observe"}, {"kind", session::observation_name(v.kind)}};
        } else if constexpr (std::is_same_v<A, IssueCommand>) {
          json j = session::to_json(v.command);
          j.erase("type");
          j["action"] = "command";
          return j;
        } else {
          json j = {{"action", "false_positive"}, {"height_ratio", v.height_ratio}, {"x", v.x}, {"y", v.y}};
          if (v.duration_ms) j["duration_ms"] = *v.duration_ms;
          return j;
        }
      },
      a);
}

}  // namespace

std::string_view actor_name(Actor a) noexcept {
  return a == Actor::Participant ? "participant" : "model";
}

ScenarioScript scenario_from_json(const json& j) {
  ScenarioScript s;
  try {
    if (!j.is_object()) invalid("scenario must be a JSON object");
    s.name = j.value("name", std::string());
    try {
      s.participant = store::profile_from_json(j.at("participant"));
    } catch (const Error& e) {
      invalid(e.what());
    }
    s.fps = j.value("fps", s.fps);
    s.seed = j.value("seed", s.seed);
    s.duration_ms = j.at("duration_ms").get<std::int64_t>();
    if (!(s.fps > 0.0)) invalid("fps must be positive");
    if (s.duration_ms <= 0) invalid("duration_ms must be positive");

    if (j.contains("scene")) {
      const auto& sc = j.at("scene");
      const auto side = sc.value("model_on", std::string("left"));
      if (side == "left") {
        s.scene.model_on = scene::Side::Left;
      } else if (side == "right") {
        s.scene.model_on = scene::Side::Right;
      } else {
        invalid("model_on must be left or right");
      }
      s.scene.participant_x = sc.value("participant_x", s.scene.participant_x);
      s.scene.model_x = sc.value("model_x", s.scene.model_x);
      s.scene.mid_hip_y = sc.value("mid_hip_y", s.scene.mid_hip_y);
      s.scene.participant_torso_px = sc.value("participant_torso_px", s.scene.participant_torso_px);
      s.scene.model_torso_px = sc.value("model_torso_px", s.scene.model_torso_px);
    }

    std::int64_t last = 0;
    for (const auto& e : j.value("timeline", json::array())) {
      ScriptEntry entry;
      entry.at_ms = e.at("at_ms").get<std::int64_t>();
      if (entry.at_ms < last) invalid("timeline at_ms must be non-decreasing");
      last = entry.at_ms;
      const auto actor = e.value("actor", std::string("participant"));
      if (actor == "participant") {
        entry.actor = Actor::Participant;
      } else if (actor == "model") {
        entry.actor = Actor::Model;
      } else {
        invalid("unknown actor '" + actor + "'");
      }
      entry.action = action_from_json(e);
      s.timeline.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    invalid(e.what());
  }
  return s;
}

json to_json(const ScenarioScript& s) {
  json timeline = json::array();
  for (const auto& e : s.timeline) {
    json j = action_to_json(e.action);
    j["at_ms"] = e.at_ms;
    j["actor"] = actor_name(e.actor);
    timeline.push_back(std::move(j));
  }
  return {{"name", s.name},
          {"participant", store::to_json(s.participant)},
          {"fps", s.fps},
          {"seed", s.seed},
          {"duration_ms", s.duration_ms},
          {"scene",
           {{"model_on", s.scene.model_on == scene::Side::Left ? "left" : "right"},
            {"participant_x", s.scene.participant_x},
            {"model_x", s.scene.model_x},
            {"mid_hip_y", s.scene.mid_hip_y},
            {"participant_torso_px", s.scene.participant_torso_px},
            {"model_torso_px", s.scene.model_torso_px}}},
          {"timeline", std::move(timeline)}};
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open scenario " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::InvalidScript, path.string() + " is not valid JSON");
  return scenario_from_json(j);
}

}  // namespace imitation::io
