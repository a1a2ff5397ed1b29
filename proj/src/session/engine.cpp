#include "imitation/session/engine.hpp"

#include "imitation/error.hpp"

#include <algorithm>
#include <atomic>

namespace imitation::session {

namespace {

template <typename T>
const T* as(const StampedEvent& e) {
  return std::get_if<T>(&e.payload);
}

bool is_observation(const StampedEvent& e, Observation kind) {
  const auto* o = as<OperatorObservation>(e);
  return o != nullptr && o->kind == kind;
}

std::vector<std::uint64_t> seqs_of(std::span<const StampedEvent> events,
                                   std::initializer_list<Observation> kinds) {
  std::vector<std::uint64_t> out;
  for (const auto& e : events) {
    for (const auto k : kinds) {
      if (is_observation(e, k)) {
        out.push_back(e.seq);
        break;
      }
    }
  }
  return out;
}

// Shared shape of the two wait-window phases: a success cue, then up to two
// interest cues that earn the intermediate code when enabled.
PhaseOutcome score_wait_phase(PhaseKind phase, std::span<const StampedEvent> window,
                              Observation success, bool smile_counts, bool head_counts) {
  PhaseOutcome out;
  out.phase = phase;
  out.evidence = seqs_of(window, {success});
  if (!out.evidence.empty()) {
    out.code = Code::C3;
  } else {
    std::vector<Observation> interest;
    if (smile_counts) interest.push_back(Observation::Smile);
    if (head_counts) interest.push_back(Observation::HeadTowards);
    for (const auto& e : window) {
      if (std::any_of(interest.begin(), interest.end(),
                      [&](Observation k) { return is_observation(e, k); })) {
        out.evidence.push_back(e.seq);
      }
    }
    out.code = out.evidence.empty() ? Code::C1 : Code::C2;
  }
  if (!window.empty()) out.decided_at = window.back().timestamp_ms;
  return out;
}

int family_rank(Code c) {
  switch (c) {
    case Code::C3a: case Code::C2a: case Code::C1a: return 1;
    case Code::C3b: case Code::C2b: case Code::C1b: return 0;
    default: return -1;
  }
}

std::atomic<std::uint64_t> g_session_counter{0};

}  // namespace

PhaseOutcome score_greetings(std::span<const StampedEvent> window, const RubricConfig& config) {
  return score_wait_phase(PhaseKind::Greetings, window, Observation::HandReach,
                          config.greetings_smile_counts, config.greetings_head_counts);
}

PhaseOutcome score_pairing(std::span<const StampedEvent> window, const RubricConfig& config) {
  return score_wait_phase(PhaseKind::Pairing, window, Observation::HandHold,
                          config.pairing_smile_counts, config.pairing_head_counts);
}

PhaseOutcome score_imitation_movement(std::span<const StampedEvent> events,
                                      const std::optional<gesture::MatchResult>& match,
                                      std::optional<std::uint64_t> match_seq) {
  using gesture::MatchStatus;
  PhaseOutcome out;
  out.phase = PhaseKind::Imitation;
  out.evidence = seqs_of(events, {Observation::ImitationAttempt});
  const bool observed = !out.evidence.empty();
  const bool matched = match && match->status == MatchStatus::Success;
  const bool algorithm_attempt =
      match && (match->status == MatchStatus::Success || match->status == MatchStatus::AttemptFailed);
  if (match_seq && (matched || algorithm_attempt)) out.evidence.push_back(*match_seq);
  std::sort(out.evidence.begin(), out.evidence.end());

  if ((observed || algorithm_attempt) && matched) {
    out.code = Code::C3a;
  } else if (observed || algorithm_attempt) {
    out.code = Code::C2a;
  } else {
    out.code = Code::C1a;
  }
  return out;
}

PhaseOutcome score_mirroring(std::span<const StampedEvent> events, const RubricConfig& config) {
  PhaseOutcome out;
  out.phase = PhaseKind::Imitation;
  out.evidence = seqs_of(events, {Observation::PositiveReaction});
  if (!out.evidence.empty()) {
    out.code = Code::C3b;
    return out;
  }
  if (config.mirroring_attention_counts) {
    out.evidence = seqs_of(events, {Observation::IncreasedAttention});
  }
  out.code = out.evidence.empty() ? Code::C1b : Code::C2b;
  return out;
}

PhaseOutcome aggregate_imitation(std::span<const PhaseOutcome> movements) {
  PhaseOutcome out;
  out.phase = PhaseKind::Imitation;
  out.code = Code::C1a;
  const PhaseOutcome* best = nullptr;
  for (const auto& m : movements) {
    if (m.phase != PhaseKind::Imitation || family_rank(m.code) < 0) continue;
    out.with_objects = out.with_objects || m.with_objects;
    out.decided_at = std::max(out.decided_at, m.decided_at);
    if (best == nullptr) {
      best = &m;
      continue;
    }
    const auto key = [](const PhaseOutcome& o) {
      return std::pair{code_level(o.code), family_rank(o.code)};
    };
    if (key(m) > key(*best)) best = &m;
  }
  if (best != nullptr) {
    out.code = best->code;
    out.evidence = best->evidence;
  }
  return out;
}

std::string_view status_name(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::Running: return "running";
    case SessionStatus::Completed: return "completed";
    case SessionStatus::Aborted: return "aborted";
  }
  return "running";
}

SessionState start_session(const store::ParticipantRegistry& registry,
                           const std::string& participant_id, const RubricConfig& config,
                           std::string session_id) {
  if (!registry.contains(participant_id)) throw Error(Errc::UnknownParticipant, participant_id);
  validate(config);
  SessionState s;
  s.participant_id = participant_id;
  s.config = config;
  s.session_id = session_id.empty()
                     ? participant_id + "-" + std::to_string(++g_session_counter)
                     : std::move(session_id);
  return s;
}

std::vector<Observation> legal_observations(const Phase& phase) {
  using O = Observation;
  switch (phase.kind) {
    case PhaseKind::Greetings: return {O::HandReach, O::Smile, O::HeadTowards};
    case PhaseKind::Pairing: return {O::HandHold, O::Smile, O::HeadTowards};
    case PhaseKind::Imitation:
      if (phase.mode == ImitationMode::Demonstrate) return {O::ImitationAttempt, O::JointAttention};
      return {O::PositiveReaction, O::IncreasedAttention};
    default: return {};
  }
}

std::vector<CommandKind> legal_commands(const Phase& phase) {
  using C = CommandKind;
  switch (phase.kind) {
    case PhaseKind::Greetings:
    case PhaseKind::Pairing: return {C::AdvancePhase, C::AssignRole, C::Abort};
    case PhaseKind::Imitation:
      if (phase.mode == ImitationMode::Demonstrate) {
        return {C::AdvancePhase, C::UseObjects, C::StartMirroring, C::ReDemonstrate, C::AssignRole,
                C::Abort};
      }
      return {C::AdvancePhase, C::UseObjects, C::AssignRole, C::Abort};
    default: return {};
  }
}

namespace {

class Transition {
 public:
  explicit Transition(SessionState& s) : s_(s) {}

  std::vector<EngineOutput> outputs;

  void arm(std::int64_t at) {
    const std::int64_t length = window_length();
    s_.window_opened_at = at;
    s_.deadline = at + length;
    outputs.emplace_back(WindowArmed{at, at + length});
  }

  // Process every window whose deadline is at or before t. Returns whether any
  // expired.
  bool expire_until(std::int64_t t) {
    bool any = false;
    while (!s_.finished() && s_.deadline && *s_.deadline <= t) {
      close_window(*s_.deadline);
      any = true;
    }
    return any;
  }

  // Scores the current window at time t and moves to the next phase or mode.
  void close_window(std::int64_t t) {
    const Phase phase = s_.phase;
    switch (phase.kind) {
      case PhaseKind::Greetings:
      case PhaseKind::Pairing: {
        const auto window = window_events(t);
        auto outcome = phase.kind == PhaseKind::Greetings ? score_greetings(window, s_.config)
                                                          : score_pairing(window, s_.config);
        outcome.decided_at = t;
        emit(std::move(outcome));
        if (phase.kind == PhaseKind::Greetings) {
          enter({PhaseKind::Pairing, 0, false, ImitationMode::Demonstrate, t});
        } else {
          enter_movement(0, t);
        }
        break;
      }
      case PhaseKind::Imitation:
        if (phase.mode == ImitationMode::Demonstrate) {
          close_demonstration(t, false);
        } else {
          close_mirroring(t);
        }
        break;
      default: break;
    }
  }

  void close_demonstration(std::int64_t t, bool force_mirroring) {
    auto outcome = score_imitation_movement(mode_events(), s_.current_match, s_.current_match_seq);
    outcome.movement = s_.phase.movement;
    outcome.with_objects = s_.phase.with_objects;
    outcome.decided_at = t;
    const bool to_mirroring = force_mirroring || outcome.code == Code::C1a;
    emit(std::move(outcome));
    if (to_mirroring) {
      Phase next = s_.phase;
      next.mode = ImitationMode::Mirroring;
      next.entered_at = t;
      enter(next);
      outputs.emplace_back(MirroringActive{true, next.movement});
      arm(t);
    } else {
      next_movement(t);
    }
  }

  void close_mirroring(std::int64_t t) {
    auto outcome = score_mirroring(mode_events(), s_.config);
    outcome.movement = s_.phase.movement;
    outcome.with_objects = s_.phase.with_objects;
    outcome.decided_at = t;
    emit(std::move(outcome));
    outputs.emplace_back(MirroringActive{false, s_.phase.movement});
    next_movement(t);
  }

  void next_movement(std::int64_t t) {
    const int next = s_.phase.movement + 1;
    if (next < s_.config.movement_count) {
      enter_movement(next, t);
    } else {
      finish(t);
    }
  }

  void enter_movement(int movement, std::int64_t t) {
    enter({PhaseKind::Imitation, movement, s_.objects_in_use, ImitationMode::Demonstrate, t});
    arm(t);
  }

  void finish(std::int64_t t) {
    set_aggregate(t);
    enter({PhaseKind::Closing, 0, false, ImitationMode::Demonstrate, t});
    s_.status = SessionStatus::Completed;
    outputs.emplace_back(SessionEnded{SessionStatus::Completed});
  }

  void abort(std::int64_t t) {
    if (s_.phase.kind == PhaseKind::Imitation && s_.phase.mode == ImitationMode::Mirroring) {
      outputs.emplace_back(MirroringActive{false, s_.phase.movement});
    }
    set_aggregate(t);
    enter({PhaseKind::Aborted, 0, false, ImitationMode::Demonstrate, t});
    s_.status = SessionStatus::Aborted;
    outputs.emplace_back(SessionEnded{SessionStatus::Aborted});
  }

  void enter(const Phase& next) {
    outputs.emplace_back(PhaseChanged{s_.phase, next});
    s_.phase = next;
    s_.window_opened_at.reset();
    s_.deadline.reset();
    s_.mode_log_start = s_.log.size();
    s_.current_match.reset();
    s_.current_match_seq.reset();
  }

 private:
  std::int64_t window_length() const {
    if (s_.phase.kind != PhaseKind::Imitation) return s_.config.wait_window_ms;
    return s_.phase.mode == ImitationMode::Demonstrate ? s_.config.imitation_window_ms
                                                       : s_.config.mirroring_window_ms;
  }

  // Logged events of the current phase inside [opened_at, t].
  std::vector<StampedEvent> window_events(std::int64_t t) const {
    std::vector<StampedEvent> out;
    if (!s_.window_opened_at) return out;
    for (std::size_t i = s_.mode_log_start; i < s_.log.size(); ++i) {
      const auto& e = s_.log[i];
      if (e.timestamp_ms >= *s_.window_opened_at && e.timestamp_ms <= t) out.push_back(e);
    }
    return out;
  }

  std::span<const StampedEvent> mode_events() const {
    return std::span<const StampedEvent>(s_.log).subspan(s_.mode_log_start);
  }

  void emit(PhaseOutcome outcome) {
    s_.outcomes.push_back(outcome);
    outputs.emplace_back(OutcomeEmitted{std::move(outcome), false});
  }

  void set_aggregate(std::int64_t t) {
    std::vector<PhaseOutcome> movements;
    for (const auto& o : s_.outcomes) {
      if (o.phase == PhaseKind::Imitation) movements.push_back(o);
    }
    if (movements.empty()) return;
    auto aggregate = aggregate_imitation(movements);
    aggregate.decided_at = t;
    s_.imitation_aggregate = aggregate;
    outputs.emplace_back(OutcomeEmitted{std::move(aggregate), true});
  }

  SessionState& s_;
};

[[noreturn]] void illegal(const Phase& phase, std::string_view what) {
  throw Error(Errc::IllegalTransition,
              std::string(what) + " is not legal in phase " + phase_label(phase));
}

bool contains(const auto& range, const auto& value) {
  return std::find(range.begin(), range.end(), value) != range.end();
}

}  // namespace

namespace {

// In-place transition. If the event is rejected, window expiries up to its
// timestamp have already been applied and their outputs are lost.
std::vector<EngineOutput> advance(SessionState& state, const SessionEvent& event) {
  const bool is_tick = std::holds_alternative<ClockTick>(event.payload);
  if (state.finished()) {
    if (is_tick) return {};
    throw Error(Errc::IllegalTransition, "session " + state.session_id + " has ended");
  }

  const std::int64_t t = std::max(state.clock, event.timestamp_ms);
  Transition tr(state);
  const bool expired = tr.expire_until(t);
  state.clock = t;

  if (is_tick) {
    if (expired) {
      state.log.push_back({state.next_seq++, t, phase_label(state.phase), event.payload});
    }
    return std::move(tr.outputs);
  }
  if (state.finished()) {
    throw Error(Errc::IllegalTransition, "session " + state.session_id + " ended before event");
  }

  // Legality is checked before anything is logged, so a rejected event leaves
  // no trace beyond the expiries it caused.
  const Phase phase = state.phase;
  if (const auto* o = std::get_if<OperatorObservation>(&event.payload)) {
    if (!contains(legal_observations(phase), o->kind)) illegal(phase, observation_name(o->kind));
  } else if (const auto* c = std::get_if<Command>(&event.payload)) {
    if (!contains(legal_commands(phase), c->kind)) illegal(phase, command_name(c->kind));
    if (c->kind == CommandKind::AssignRole &&
        (!c->track || c->role == scene::Role::Unassigned)) {
      throw Error(Errc::IllegalTransition, "AssignRole needs a track and a participant or model role");
    }
  }

  // Only AssignRole carries a track and role; others are logged without them so
  // that the log survives a serialization round trip unchanged.
  Payload payload = event.payload;
  if (auto* c = std::get_if<Command>(&payload); c != nullptr && c->kind != CommandKind::AssignRole) {
    *c = Command{c->kind};
  }
  const std::uint64_t seq = state.next_seq++;
  state.log.push_back({seq, t, phase_label(phase), std::move(payload)});

  const auto algorithm_event = [&](int movement, const gesture::MatchResult& result) {
    const bool current = phase.kind == PhaseKind::Imitation &&
                         phase.mode == ImitationMode::Demonstrate && movement == phase.movement;
    if (!current) {
      tr.outputs.emplace_back(
          Warning{"stale matcher result for movement " + std::to_string(movement) + " ignored"});
      return;
    }
    state.current_match = result;
    state.current_match_seq = seq;
  };

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GestureMatched> || std::is_same_v<P, GestureFailed>) {
          algorithm_event(p.movement, p.result);
        } else if constexpr (std::is_same_v<P, ActivityChange>) {
          std::string text = "activity changed: energy " + std::to_string(p.stats.energy);
          if (p.stats.rhythm_period_ms) {
            text += ", rhythm " + std::to_string(static_cast<long long>(*p.stats.rhythm_period_ms)) +
                    " ms";
          }
          tr.outputs.emplace_back(Suggestion{std::move(text), p.stats});
        } else if constexpr (std::is_same_v<P, Command>) {
          switch (p.kind) {
            case CommandKind::AdvancePhase:
              if (state.window_opened_at) {
                tr.close_window(t);
              } else {
                tr.arm(t);
              }
              break;
            case CommandKind::UseObjects:
              state.objects_in_use = true;
              state.phase.with_objects = true;
              break;
            case CommandKind::StartMirroring: tr.close_demonstration(t, true); break;
            case CommandKind::ReDemonstrate:
              state.current_match.reset();
              state.current_match_seq.reset();
              tr.arm(t);
              break;
            case CommandKind::AssignRole:
              tr.outputs.emplace_back(RoleAssignment{*p.track, p.role});
              break;
            case CommandKind::Abort: tr.abort(t); break;
          }
        }
      },
      event.payload);

  return std::move(tr.outputs);
}

}  // namespace

StepResult step(SessionState state, const SessionEvent& event) {
  auto outputs = advance(state, event);
  return {std::move(state), std::move(outputs)};
}

std::vector<EngineOutput> Engine::apply(const SessionEvent& event) { return advance(state_, event); }

SessionState replay(const std::string& session_id, const std::string& participant_id,
                    const RubricConfig& config, std::span<const StampedEvent> log) {
  validate(config);
  SessionState s;
  s.session_id = session_id;
  s.participant_id = participant_id;
  s.config = config;
  for (const auto& e : log) advance(s, {e.timestamp_ms, e.payload});
  return s;
}

}  // namespace imitation::session
