#include "imitation/gateway/runner.hpp"

#include "imitation/error.hpp"
#include "imitation/scene/filter.hpp"
#include "imitation/session/codec.hpp"

#include <algorithm>

namespace imitation::gateway {

using nlohmann::json;
using session::ImitationMode;
using session::PhaseKind;

namespace {

bool demonstrating(const session::SessionState& s) {
  return !s.finished() && s.phase.kind == PhaseKind::Imitation &&
         s.phase.mode == ImitationMode::Demonstrate && s.window_opened_at.has_value();
}

bool mirroring(const session::SessionState& s) {
  return !s.finished() && s.phase.kind == PhaseKind::Imitation &&
         s.phase.mode == ImitationMode::Mirroring;
}

json keypoints(const pose::Skeleton& s) {
  json values = json::array();
  for (int j = 0; j < pose::kJointCount; ++j) {
    values.push_back(s.xy(j, 0));
    values.push_back(s.xy(j, 1));
    values.push_back(s.confidence(j));
  }
  return values;
}

template <typename T>
json names(const std::vector<T>& values, std::string_view (*name)(T) noexcept) {
  json out = json::array();
  for (const auto v : values) out.push_back(name(v));
  return out;
}

}  // namespace

SessionRunner::SessionRunner(GatewayConfig config, session::SessionState initial,
                             store::SessionStore* store, std::int64_t started_at)
    : config_(std::move(config)),
      templates_(resolve_templates(config_)),
      engine_(std::move(initial)),
      store_(store),
      started_at_(started_at) {
  persisted_ = engine_.state().log.size();
}

void SessionRunner::emit(std::string type, json body) {
  if (on_output) on_output(WireEvent{std::move(type), std::move(body)});
}

void SessionRunner::add_warning(const std::string& text) {
  warnings_.push_back(text);
  emit("warning", {{"text", text}, {"t_ms", engine_.state().clock}});
}

void SessionRunner::persist() {
  const auto& log = engine_.state().log;
  if (store_ != nullptr) {
    for (std::size_t i = persisted_; i < log.size(); ++i) {
      store_->append_event(engine_.state().session_id, log[i]);
    }
  }
  persisted_ = log.size();
}

void SessionRunner::handle(const session::EngineOutput& out) {
  std::visit(
      [&](const auto& v) {
        using O = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<O, session::OutcomeEmitted>) {
          emit("outcome", {{"aggregate", v.aggregate}, {"outcome", session::to_json(v.outcome)}});
        } else if constexpr (std::is_same_v<O, session::Warning>) {
          add_warning(v.text);
        } else if constexpr (std::is_same_v<O, session::Suggestion>) {
          emit("suggestion",
               {{"kind", "activity_change"}, {"text", v.text}, {"stats", session::to_json(v.stats)}});
        } else if constexpr (std::is_same_v<O, session::MirroringActive>) {
          emit("suggestion", {{"kind", "mirroring"}, {"active", v.active}, {"movement", v.movement}});
        }
      },
      out);
}

void SessionRunner::apply(const session::SessionEvent& event) {
  const auto before = engine_.state().log.size();
  const auto outputs = engine_.apply(event);
  for (const auto& o : outputs) handle(o);
  persist();
  if (!outputs.empty() || engine_.state().log.size() != before) emit("state", state_json());
}

void SessionRunner::submit_match(std::int64_t t, bool final_verdict) {
  const auto& s = engine_.state();
  if (!demonstrating(s) || verdict_sent_ || match_buffer_.empty()) return;
  if (!match_key_ || *match_key_ != std::pair{s.phase.movement, *s.window_opened_at}) return;
  const auto& tmpl = gesture::find_template(
      templates_, config_.runner.movements[static_cast<std::size_t>(s.phase.movement)]);
  const auto result = gesture::match_gesture(match_buffer_, tmpl, config_.match);
  if (result.status == gesture::MatchStatus::Success) {
    verdict_sent_ = true;
    apply({t, session::GestureMatched{s.phase.movement, result}});
  } else if (final_verdict) {
    verdict_sent_ = true;
    apply({t, session::GestureFailed{s.phase.movement, result}});
  }
}

void SessionRunner::tick(std::int64_t t) {
  if (finished_) return;
  const auto& s = engine_.state();
  // The matcher's verdict must land inside the window it belongs to.
  if (demonstrating(s) && s.deadline && *s.deadline <= t) {
    submit_match(std::max(s.clock, *s.deadline - 1), true);
  }
  apply({t, session::ClockTick{}});
}

void SessionRunner::on_event(const session::SessionEvent& event) {
  if (finished_) throw Error(Errc::SessionClosed, engine_.state().session_id);
  tick(event.timestamp_ms);
  const auto& s = engine_.state();
  if (const auto* c = std::get_if<session::Command>(&event.payload)) {
    if (c->kind == session::CommandKind::AssignRole && c->track) {
      tracker_.tracks = scene::assign_roles(tracker_.tracks, scene::ByOperator{*c->track, c->role});
    }
    if ((c->kind == session::CommandKind::AdvancePhase ||
         c->kind == session::CommandKind::StartMirroring) &&
        demonstrating(s)) {
      submit_match(std::max(s.clock, event.timestamp_ms), true);
    }
  }
  apply(event);
  if (const auto* o = std::get_if<session::OperatorObservation>(&event.payload)) {
    emit("observe", {{"kind", session::observation_name(o->kind)}, {"t_ms", engine_.state().clock}});
  } else if (const auto* c = std::get_if<session::Command>(&event.payload)) {
    json body = session::to_json(*c);
    body.erase("type");
    body["t_ms"] = engine_.state().clock;
    emit("command", std::move(body));
  }
}

void SessionRunner::update_roles() {
  auto& tracks = tracker_.tracks;
  if (tracks.empty() || scene::roles_settled(tracks)) return;
  if (config_.runner.role_mode == RoleMode::ByOperator) {
    // Only complete a pair the operator started.
    const bool any = std::any_of(tracks.begin(), tracks.end(), [](const scene::TrackedPerson& p) {
      return p.role != scene::Role::Unassigned;
    });
    if (!any || tracks.size() != 2) return;
  }
  try {
    tracks = scene::assign_roles(tracks, scene::BySide{config_.runner.model_on});
    roles_warned_ = false;
    emit("state", state_json());
  } catch (const Error& e) {
    if (e.code() != Errc::AmbiguousRoles) throw;
    if (!roles_warned_ && tracks.size() > 2) {
      add_warning("roles undecided: " + std::to_string(tracks.size()) + " people in view");
      roles_warned_ = true;
    }
  }
}

void SessionRunner::check_model_visibility(const pose::Frame& frame) {
  const auto* model = scene::find_role(tracker_.tracks, scene::Role::Model);
  if (model == nullptr || model->last_seen != frame.timestamp_ms) return;
  const double coverage = scene::visibility(model->last_skeleton, config_.runner.conf_min).coverage;
  const bool low = coverage < config_.runner.low_visibility_coverage;
  if (low && !model_low_) {
    add_warning("low model visibility: " + std::to_string(static_cast<int>(coverage * 100.0 + 0.5)) +
                "% of joints detected");
  }
  model_low_ = low;
}

void SessionRunner::matcher_step(const gesture::PoseSample& sample) {
  const auto& s = engine_.state();
  const std::pair key{s.phase.movement, *s.window_opened_at};
  if (match_key_ != key) {
    match_key_ = key;
    match_buffer_.clear();
    last_match_.reset();
    verdict_sent_ = false;
  }
  if (sample.timestamp_ms < key.second) return;
  if (!match_buffer_.empty() && sample.timestamp_ms <= match_buffer_.back().timestamp_ms) return;
  match_buffer_.push_back(sample);
  if (verdict_sent_) return;

  const auto& tmpl = gesture::find_template(
      templates_, config_.runner.movements[static_cast<std::size_t>(key.first)]);
  const auto result = gesture::match_gesture(match_buffer_, tmpl, config_.match);
  if (!last_match_ || last_match_->keyframes_matched != result.keyframes_matched ||
      last_match_->status != result.status) {
    emit("suggestion", {{"kind", "match_progress"},
                        {"movement", key.first},
                        {"gesture", tmpl.name},
                        {"status", gesture::status_name(result.status)},
                        {"chirality", gesture::chirality_name(result.chirality)},
                        {"keyframes_matched", result.keyframes_matched},
                        {"best_similarity", result.best_similarity}});
  }
  last_match_ = result;
  if (result.status == gesture::MatchStatus::Success) {
    verdict_sent_ = true;
    apply({sample.timestamp_ms, session::GestureMatched{key.first, result}});
  }
}

void SessionRunner::mirroring_step(const gesture::PoseSample& sample) {
  const auto& s = engine_.state();
  const std::pair key{s.phase.movement, s.phase.entered_at};
  if (motion_key_ != key) {
    motion_key_ = key;
    motion_buffer_.clear();
    last_motion_.reset();
    next_motion_at_ = sample.timestamp_ms + config_.runner.motion_interval_ms;
  }
  if (sample.skeleton) motion_buffer_.push_back(sample);
  const std::int64_t horizon = sample.timestamp_ms - config_.runner.motion_window_ms;
  std::erase_if(motion_buffer_, [&](const gesture::PoseSample& p) { return p.timestamp_ms < horizon; });
  if (sample.timestamp_ms < next_motion_at_) return;
  next_motion_at_ += config_.runner.motion_interval_ms;

  gesture::MotionStats stats;
  try {
    stats = gesture::motion_stats(motion_buffer_, config_.runner.motion_window_ms, config_.rhythm);
  } catch (const Error& e) {
    if (e.code() == Errc::WindowTooSmall) return;
    throw;
  }
  if (last_motion_ &&
      gesture::activity_changed(*last_motion_, stats, config_.runner.rhythm_change_ratio)) {
    apply({sample.timestamp_ms, session::ActivityChange{stats}});
  }
  last_motion_ = stats;
}

void SessionRunner::broadcast_frame(const pose::Frame& frame) {
  const auto min_gap = static_cast<std::int64_t>(1000.0 / config_.runner.console_frame_rate);
  if (last_broadcast_ && frame.timestamp_ms - *last_broadcast_ < min_gap) return;
  last_broadcast_ = frame.timestamp_ms;

  json people = json::array();
  for (const auto& p : tracker_.tracks) {
    if (p.last_seen != frame.timestamp_ms) continue;
    people.push_back({{"track", p.track_id},
                      {"role", scene::role_name(p.role)},
                      {"pose_keypoints_2d", keypoints(p.last_skeleton)}});
  }
  emit("frame", {{"t_ms", frame.timestamp_ms}, {"source", pose::to_string(frame.source)},
                 {"people", std::move(people)}});

  if (mirroring(engine_.state())) {
    const auto* participant = scene::find_role(tracker_.tracks, scene::Role::Participant);
    if (participant != nullptr && participant->last_seen == frame.timestamp_ms) {
      if (const auto n = pose::try_normalize(participant->last_skeleton, config_.runner.conf_min)) {
        const auto cmd = gesture::mirror_pose_command(*n);
        emit("suggestion",
             {{"kind", "mirror_pose"}, {"t_ms", frame.timestamp_ms}, {"targets", cmd.targets}});
      }
    }
  }
}

void SessionRunner::on_frame(const pose::Frame& frame) {
  if (finished_) return;
  const std::int64_t t = frame.timestamp_ms;
  tick(t);

  const auto filtered = scene::reject_false_positives(frame, config_.filter);
  tracker_ = scene::track(std::move(tracker_), filtered, config_.tracking);
  update_roles();
  check_model_visibility(filtered);

  gesture::PoseSample sample = gesture::absent_sample(t);
  const auto* participant = scene::find_role(tracker_.tracks, scene::Role::Participant);
  if (participant != nullptr && participant->last_seen == t) {
    sample = gesture::make_sample(t, participant->last_skeleton, config_.runner.conf_min);
  }
  if (demonstrating(engine_.state())) {
    matcher_step(sample);
  } else if (mirroring(engine_.state())) {
    mirroring_step(sample);
  }
  broadcast_frame(filtered);
}

void SessionRunner::finish() {
  if (finished_) return;
  if (!engine_.state().finished()) {
    add_warning("stream ended in " + session::phase_label(engine_.state().phase) +
                "; session aborted");
    apply({engine_.state().clock, session::Command{session::CommandKind::Abort, {}, {}}});
  }
  finished_ = true;
  if (store_ != nullptr) store_->close_session(record());
}

store::SessionRecord SessionRunner::record() const {
  return store::record_from_state(engine_.state(), started_at_, warnings_);
}

json SessionRunner::state_json() const {
  const auto& s = engine_.state();
  json outcomes = json::array();
  for (const auto& o : s.outcomes) outcomes.push_back(session::to_json(o));
  json tracks = json::array();
  for (const auto& p : tracker_.tracks) {
    tracks.push_back({{"track", p.track_id}, {"role", scene::role_name(p.role)}});
  }
  return {
      {"session_id", s.session_id},
      {"participant_id", s.participant_id},
      {"status", session::status_name(s.status)},
      {"clock", s.clock},
      {"phase", session::to_json(s.phase)},
      {"window",
       s.window_opened_at ? json{{"opened_at", *s.window_opened_at}, {"deadline", *s.deadline}}
                          : json(nullptr)},
      {"objects_in_use", s.objects_in_use},
      {"mirroring", mirroring(s)},
      {"legal_observations", names(session::legal_observations(s.phase), session::observation_name)},
      {"legal_commands", s.finished() ? json::array()
                                      : names(session::legal_commands(s.phase), session::command_name)},
      {"outcomes", std::move(outcomes)},
      {"imitation_aggregate",
       s.imitation_aggregate ? session::to_json(*s.imitation_aggregate) : json(nullptr)},
      {"log_size", s.log.size()},
      {"tracks", std::move(tracks)},
  };
}

namespace {

session::SessionState open_session(const io::ScenarioScript& script, const GatewayConfig& config,
                                   store::SessionStore* store, store::ParticipantRegistry& local) {
  const auto& pid = script.participant.id;
  if (store != nullptr) {
    if (!store->registry().contains(pid)) store->register_participant(script.participant);
    const auto id = store->create_session(pid, config.rubric);
    return session::start_session(store->registry(), pid, config.rubric, id);
  }
  local.register_participant(script.participant);
  return session::start_session(local, pid, config.rubric, pid + "-sim");
}

void apply_scripted(SessionRunner& runner, const session::SessionEvent& e, RunResult& result) {
  try {
    runner.on_event(e);
  } catch (const Error& err) {
    if (err.code() != Errc::IllegalTransition && err.code() != Errc::UnknownTrack) throw;
    ++result.rejected_events;
    runner.add_warning(std::string("scripted event rejected: ") + err.what());
  }
}

}  // namespace

RunResult run_scenario(const io::ScenarioScript& script, const GatewayConfig& config,
                       store::SessionStore* store, bool capture_messages) {
  GatewayConfig cfg = config;
  cfg.runner.model_on = script.scene.model_on;
  store::ParticipantRegistry local;
  SessionRunner runner(cfg, open_session(script, cfg, store, local), store);
  RunResult result;
  if (capture_messages) runner.on_output = [&](const WireEvent& m) { result.messages.push_back(m); };

  io::Simulator sim(script, resolve_templates(cfg));
  while (!sim.done()) {
    const auto frame = sim.next_frame();
    for (const auto& e : sim.take_events_until(frame.timestamp_ms)) apply_scripted(runner, e, result);
    runner.on_frame(frame);
  }
  for (const auto& e : sim.take_events_until(script.duration_ms)) apply_scripted(runner, e, result);
  runner.finish();
  result.record = runner.record();
  return result;
}

RunResult run_frames(const std::vector<pose::Frame>& frames, const io::ScenarioScript& script,
                     const GatewayConfig& config, store::SessionStore* store) {
  GatewayConfig cfg = config;
  cfg.runner.model_on = script.scene.model_on;
  store::ParticipantRegistry local;
  SessionRunner runner(cfg, open_session(script, cfg, store, local), store);
  RunResult result;

  std::vector<session::SessionEvent> events;
  for (const auto& e : script.timeline) {
    if (const auto* o = std::get_if<io::Observe>(&e.action)) {
      events.push_back({e.at_ms, session::OperatorObservation{o->kind}});
    } else if (const auto* c = std::get_if<io::IssueCommand>(&e.action)) {
      events.push_back({e.at_ms, c->command});
    }
  }
  std::size_t next = 0;
  for (const auto& frame : frames) {
    while (next < events.size() && events[next].timestamp_ms <= frame.timestamp_ms) {
      apply_scripted(runner, events[next++], result);
    }
    runner.on_frame(frame);
  }
  while (next < events.size()) apply_scripted(runner, events[next++], result);
  runner.finish();
  result.record = runner.record();
  return result;
}

}  // namespace imitation::gateway
