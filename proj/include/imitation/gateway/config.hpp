#pragma once

#include "imitation/gesture/matcher.hpp"
#include "imitation/gesture/motion.hpp"
#include "imitation/gesture/template.hpp"
#include "imitation/scene/filter.hpp"
#include "imitation/scene/tracker.hpp"
#include "imitation/session/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace imitation::gateway {

enum class RoleMode { BySide, ByOperator };

struct RunnerConfig {
  double conf_min = pose::kDefaultConfMin;
  RoleMode role_mode = RoleMode::BySide;
  scene::Side model_on = scene::Side::Left;
  // Movement i of the imitation phase uses template movements[i].
  std::vector<std::string> movements = {std::string(gesture::kRaiseArmsSky),
                                        std::string(gesture::kArmsSideBendForward),
                                        std::string(gesture::kArmsForwardBendToes)};
  std::int64_t motion_window_ms = 3000;
  std::int64_t motion_interval_ms = 1000;
  double rhythm_change_ratio = 1.5;
  double low_visibility_coverage = 0.5;  // model coverage below this warns
  double console_frame_rate = 20.0;      // frames and mirror commands per second, at most
};

// Every tunable of a session, loadable from one JSON document. Missing keys
// keep the defaults documented here.
struct GatewayConfig {
  std::string listen = "127.0.0.1:8765";       // console channel
  std::string pose_listen = "127.0.0.1:8766";  // live pose stream
  std::optional<std::filesystem::path> store;
  double replay_fps = 15.0;

  scene::FilterConfig filter;
  scene::TrackConfig tracking;
  gesture::MatchConfig match;
  gesture::RhythmConfig rhythm;
  gesture::TemplateDefaults templates;
  std::vector<std::filesystem::path> template_files;  // extra templates, JSON
  session::RubricConfig rubric;
  RunnerConfig runner;

  bool operator==(const GatewayConfig&) const;
};

// Throws Error(InvalidConfig) for wrong types or out-of-range values.
GatewayConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GatewayConfig& c);
GatewayConfig load_config(const std::filesystem::path& path);

// IMITATION_LISTEN replaces `listen`, IMITATION_STORE replaces `store`.
void apply_env_overrides(GatewayConfig& c);

// Builtin templates with the configured defaults, plus the template files.
// Throws Error(UnknownGesture) if a listed movement has no template.
std::vector<gesture::GestureTemplate> resolve_templates(const GatewayConfig& c);

}  // namespace imitation::gateway
