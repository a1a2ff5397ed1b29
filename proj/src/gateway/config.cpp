#include "imitation/gateway/config.hpp"

#include "imitation/error.hpp"
#include "imitation/gesture/template_io.hpp"
#include "imitation/session/codec.hpp"

#include <cstdlib>
#include <fstream>

namespace imitation::gateway {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid(std::string("\"") + key + "\": " + e.what());
  }
}

json section(const json& j, const char* key) {
  if (!j.contains(key)) return json::object();
  if (!j.at(key).is_object()) invalid(std::string("\"") + key + "\" must be an object");
  return j.at(key);
}

void require(bool ok, const std::string& what) {
  if (!ok) invalid(what);
}

}  // namespace

bool GatewayConfig::operator==(const GatewayConfig& o) const { return to_json(*this) == to_json(o); }

GatewayConfig config_from_json(const json& j) {
  if (!j.is_object()) invalid("config must be a JSON object");
  GatewayConfig c;
  read(j, "listen", c.listen);
  read(j, "pose_listen", c.pose_listen);
  if (j.contains("store") && !j.at("store").is_null()) {
    std::string s;
    read(j, "store", s);
    c.store = s;
  }
  read(j, "replay_fps", c.replay_fps);
  require(c.replay_fps > 0.0, "replay_fps must be positive");

  const auto filter = section(j, "filter");
  read(filter, "min_height_ratio", c.filter.min_height_ratio);
  read(filter, "min_coverage", c.filter.min_coverage);
  read(filter, "conf_min", c.filter.conf_min);
  require(c.filter.min_height_ratio >= 0.0 && c.filter.min_height_ratio <= 1.0,
          "filter.min_height_ratio must be in [0, 1]");
  require(c.filter.min_coverage >= 0.0 && c.filter.min_coverage <= 1.0,
          "filter.min_coverage must be in [0, 1]");

  const auto tracking = section(j, "tracking");
  read(tracking, "max_jump", c.tracking.max_jump);
  read(tracking, "track_ttl_ms", c.tracking.track_ttl_ms);
  read(tracking, "trace_length", c.tracking.trace_length);
  read(tracking, "conf_min", c.tracking.conf_min);
  require(c.tracking.max_jump > 0.0, "tracking.max_jump must be positive");
  require(c.tracking.track_ttl_ms >= 0, "tracking.track_ttl_ms must be non-negative");

  const auto match = section(j, "match");
  read(match, "attempt_energy_min", c.match.attempt_energy_min);
  read(match, "reference_fps", c.match.reference_fps);
  read(match, "unscoreable_fraction", c.match.unscoreable_fraction);
  if (match.contains("arm_length") && !match.at("arm_length").is_null()) {
    double a = 0.0;
    read(match, "arm_length", a);
    require(a > 0.0, "match.arm_length must be positive");
    c.match.arm_length = a;
  }
  require(c.match.reference_fps > 0.0, "match.reference_fps must be positive");

  const auto rhythm = section(j, "rhythm");
  read(rhythm, "min_variance", c.rhythm.min_variance);
  read(rhythm, "smoothing", c.rhythm.smoothing);

  const auto t = section(j, "templates");
  read(t, "angle_tolerance", c.templates.angle_tolerance);
  read(t, "hold_ms", c.templates.hold_ms);
  read(t, "timeout_ms", c.templates.timeout_ms);
  read(t, "bend_threshold", c.templates.bend_threshold);
  read(t, "deep_bend_threshold", c.templates.deep_bend_threshold);
  read(t, "forward_extent_fraction", c.templates.forward_extent_fraction);
  read(t, "wrist_level_tolerance", c.templates.wrist_level_tolerance);
  read(t, "wrist_below_hip", c.templates.wrist_below_hip);
  std::vector<std::string> files;
  read(j, "template_files", files);
  c.template_files.assign(files.begin(), files.end());

  if (j.contains("rubric")) {
    try {
      c.rubric = session::rubric_from_json(section(j, "rubric"));
    } catch (const Error& e) {
      invalid(e.what());
    }
  }

  const auto r = section(j, "runner");
  read(r, "conf_min", c.runner.conf_min);
  if (r.contains("role_policy")) {
    std::string policy;
    read(r, "role_policy", policy);
    if (policy == "by_side") {
      c.runner.role_mode = RoleMode::BySide;
    } else if (policy == "by_operator") {
      c.runner.role_mode = RoleMode::ByOperator;
    } else {
      invalid("runner.role_policy must be by_side or by_operator");
    }
  }
  if (r.contains("model_on")) {
    std::string side;
    read(r, "model_on", side);
    require(side == "left" || side == "right", "runner.model_on must be left or right");
    c.runner.model_on = side == "left" ? scene::Side::Left : scene::Side::Right;
  }
  read(r, "movements", c.runner.movements);
  read(r, "motion_window_ms", c.runner.motion_window_ms);
  read(r, "motion_interval_ms", c.runner.motion_interval_ms);
  read(r, "rhythm_change_ratio", c.runner.rhythm_change_ratio);
  read(r, "low_visibility_coverage", c.runner.low_visibility_coverage);
  read(r, "console_frame_rate", c.runner.console_frame_rate);
  require(static_cast<int>(c.runner.movements.size()) >= c.rubric.movement_count,
          "runner.movements must name a template for every movement");
  require(c.runner.motion_window_ms > 0 && c.runner.motion_interval_ms > 0,
          "runner motion window and interval must be positive");
  require(c.runner.rhythm_change_ratio > 1.0, "runner.rhythm_change_ratio must exceed 1");
  require(c.runner.console_frame_rate > 0.0, "runner.console_frame_rate must be positive");
  return c;
}

json to_json(const GatewayConfig& c) {
  json files = json::array();
  for (const auto& f : c.template_files) files.push_back(f.string());
  return {
      {"listen", c.listen},
      {"pose_listen", c.pose_listen},
      {"store", c.store ? json(c.store->string()) : json(nullptr)},
      {"replay_fps", c.replay_fps},
      {"filter",
       {{"min_height_ratio", c.filter.min_height_ratio},
        {"min_coverage", c.filter.min_coverage},
        {"conf_min", c.filter.conf_min}}},
      {"tracking",
       {{"max_jump", c.tracking.max_jump},
        {"track_ttl_ms", c.tracking.track_ttl_ms},
        {"trace_length", c.tracking.trace_length},
        {"conf_min", c.tracking.conf_min}}},
      {"match",
       {{"attempt_energy_min", c.match.attempt_energy_min},
        {"reference_fps", c.match.reference_fps},
        {"unscoreable_fraction", c.match.unscoreable_fraction},
        {"arm_length", c.match.arm_length ? json(*c.match.arm_length) : json(nullptr)}}},
      {"rhythm", {{"min_variance", c.rhythm.min_variance}, {"smoothing", c.rhythm.smoothing}}},
      {"templates",
       {{"angle_tolerance", c.templates.angle_tolerance},
        {"hold_ms", c.templates.hold_ms},
        {"timeout_ms", c.templates.timeout_ms},
        {"bend_threshold", c.templates.bend_threshold},
        {"deep_bend_threshold", c.templates.deep_bend_threshold},
        {"forward_extent_fraction", c.templates.forward_extent_fraction},
        {"wrist_level_tolerance", c.templates.wrist_level_tolerance},
        {"wrist_below_hip", c.templates.wrist_below_hip}}},
      {"template_files", std::move(files)},
      {"rubric", session::to_json(c.rubric)},
      {"runner",
       {{"conf_min", c.runner.conf_min},
        {"role_policy", c.runner.role_mode == RoleMode::BySide ? "by_side" : "by_operator"},
        {"model_on", c.runner.model_on == scene::Side::Left ? "left" : "right"},
        {"movements", c.runner.movements},
        {"motion_window_ms", c.runner.motion_window_ms},
        {"motion_interval_ms", c.runner.motion_interval_ms},
        {"rhythm_change_ratio", c.runner.rhythm_change_ratio},
        {"low_visibility_coverage", c.runner.low_visibility_coverage},
        {"console_frame_rate", c.runner.console_frame_rate}}},
  };
}

GatewayConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) invalid(path.string() + " is not valid JSON");
  auto c = config_from_json(j);
  // Relative template paths are resolved against the config file.
  for (auto& f : c.template_files) {
    if (f.is_relative()) f = path.parent_path() / f;
  }
  return c;
}

void apply_env_overrides(GatewayConfig& c) {
  if (const char* listen = std::getenv("IMITATION_LISTEN"); listen != nullptr && *listen != '\0') {
    c.listen = listen;
  }
  if (const char* store = std::getenv("IMITATION_STORE"); store != nullptr && *store != '\0') {
    c.store = store;
  }
}

std::vector<gesture::GestureTemplate> resolve_templates(const GatewayConfig& c) {
  auto templates = gesture::builtin_templates(c.templates);
  for (const auto& f : c.template_files) {
    for (auto& t : gesture::load_templates(f)) {
      std::erase_if(templates, [&](const gesture::GestureTemplate& x) { return x.name == t.name; });
      templates.push_back(std::move(t));
    }
  }
  for (int i = 0; i < c.rubric.movement_count; ++i) {
    (void)gesture::find_template(templates, c.runner.movements[static_cast<std::size_t>(i)]);
  }
  return templates;
}

}  // namespace imitation::gateway
