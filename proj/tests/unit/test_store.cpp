#include "fixtures.hpp"

#include "imitation/error.hpp"
#include "imitation/gateway/runner.hpp"
#include "imitation/io/scenario.hpp"
#include "imitation/session/codec.hpp"
#include "imitation/session/engine.hpp"
#include "imitation/store/codec.hpp"
#include "imitation/store/report.hpp"
#include "imitation/store/store.hpp"

#include <doctest.h>

#include <fstream>

using namespace imitation;
using namespace imitation::store;

namespace {

session::StampedEvent event(std::uint64_t seq, std::int64_t t) {
  return {seq, t, "greetings", session::OperatorObservation{session::Observation::Smile}};
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::Io;
}

gateway::RunResult run(const std::string& id, SessionStore* store = nullptr) {
  return gateway::run_scenario(
      io::load_scenario(fixtures::source_dir() / ("scenarios/session_" + id + ".json")),
      gateway::GatewayConfig{}, store);
}

}  // namespace

TEST_CASE("participant profiles") {
  ParticipantRegistry r;
  r.register_participant(fixtures::profile("F"));
  const auto f = r.at("F");
  CHECK(f.biological_age == 18);
  CHECK(f.nd_age == 9);
  CHECK(f.cars_score == 33);
  CHECK(code_of([&] { r.register_participant(fixtures::profile("F")); }) == Errc::DuplicateId);
  CHECK(code_of([&] { (void)r.at("Z"); }) == Errc::UnknownParticipant);

  const auto i = profile_from_json(to_json(fixtures::profile("I")));
  CHECK(i.nd_age == 0.5);
  CHECK(i == fixtures::profile("I"));

  ParticipantProfile bad = fixtures::profile("X");
  bad.cars_score = 0;
  CHECK(code_of([&] { validate(bad); }) == Errc::InvalidConfig);
}

TEST_CASE("store keeps profiles across restarts") {
  fixtures::TempDir dir;
  {
    SessionStore s(dir.path());
    s.register_participant(fixtures::profile("F"));
    CHECK(code_of([&] { s.register_participant(fixtures::profile("F")); }) == Errc::DuplicateId);
  }
  SessionStore again(dir.path());
  CHECK(again.registry().at("F") == fixtures::profile("F"));
}

TEST_CASE("sessions get distinct ids") {
  fixtures::TempDir dir;
  SessionStore s(dir.path());
  s.register_participant(fixtures::profile("F"));
  const auto a = s.create_session("F", {});
  const auto b = s.create_session("F", {});
  CHECK(a != b);
  CHECK(a == "F-001");
  CHECK(code_of([&] { (void)s.create_session("Z", {}); }) == Errc::UnknownParticipant);
}

TEST_CASE("appended events survive a crash") {
  fixtures::TempDir dir;
  std::string id;
  {
    SessionStore s(dir.path());
    s.register_participant(fixtures::profile("F"));
    id = s.create_session("F", {});
    s.append_event(id, event(1, 100));
    s.append_event(id, event(2, 200));
    // No close: the process dies here.
  }
  // A torn write at the tail.
  std::ofstream(dir.path() / "sessions" / (id + ".jsonl"), std::ios::app) << R"({"seq":3,"t_ms)";

  SessionStore s(dir.path());
  CHECK(s.is_open(id));
  const auto r = s.load(id);
  REQUIRE(r.log.size() == 2);
  CHECK(r.log[1] == event(2, 200));
  CHECK(r.status == session::SessionStatus::Running);
  // The session can be continued after the restart.
  s.append_event(id, event(3, 300));
  CHECK(s.load(id).log.size() == 3);
}

TEST_CASE("a corrupt line in the middle is an error") {
  fixtures::TempDir dir;
  const auto path = dir.path() / "log.jsonl";
  std::ofstream(path) << session::to_json(event(1, 0)).dump() << "\nnope\n"
                      << session::to_json(event(2, 0)).dump() << "\n";
  CHECK(code_of([&] { (void)read_log(path); }) == Errc::MalformedJson);
}

TEST_CASE("closed sessions reject appends") {
  fixtures::TempDir dir;
  SessionStore s(dir.path());
  s.register_participant(fixtures::profile("F"));
  const auto result = run("F", &s);
  const auto id = result.record.session_id;
  CHECK_FALSE(s.is_open(id));
  CHECK(code_of([&] { s.append_event(id, event(999, 0)); }) == Errc::SessionClosed);
  CHECK(code_of([&] { s.append_event("nope", event(1, 0)); }) == Errc::UnknownSession);
}

TEST_CASE("10,000 events keep their order") {
  fixtures::TempDir dir;
  SessionStore s(dir.path());
  s.register_participant(fixtures::profile("F"));
  const auto id = s.create_session("F", {});
  for (std::uint64_t i = 1; i <= 10000; ++i) s.append_event(id, event(i, static_cast<std::int64_t>(i)));
  const auto log = read_log(dir.path() / "sessions" / (id + ".jsonl"));
  REQUIRE(log.size() == 10000);
  for (std::size_t i = 0; i < log.size(); ++i) CHECK(log[i].seq == i + 1);
}

TEST_CASE("stored sessions replay to the same outcomes") {
  fixtures::TempDir dir;
  {
    SessionStore s(dir.path());
    for (const char* id : {"F", "I"}) run(id, &s);
  }
  SessionStore s(dir.path());
  const auto all = s.load_all();
  REQUIRE(all.size() == 2);
  for (const auto& r : all) CHECK(replay_consistent(r));
}

TEST_CASE("report rows") {
  const auto f = report_row(run("F").record);
  CHECK(compact_row(f) == "F | 3 | 3 | 3a | imitation without objects");
  CHECK_FALSE(f.mirroring_triggered);
  const auto i = report_row(run("I").record);
  CHECK(compact_row(i) == "I | 3 | 3 | 3b | recognition of being imitated");
  CHECK(i.mirroring_triggered);

  const std::vector rows{f, i};
  const auto table = render_table(rows);
  CHECK(table.find("participant") == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
  const auto j = report_json(rows);
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][1]["imitation"] == "3b");
}

TEST_CASE("aborted in pairing") {
  const auto reg = fixtures::registry();
  session::Engine e(session::start_session(reg, "G", {}, "G-x"));
  e.apply({0, session::Command{session::CommandKind::AdvancePhase}});
  e.apply({1000, session::OperatorObservation{session::Observation::HandReach}});
  e.apply({2000, session::Command{session::CommandKind::AdvancePhase}});
  e.apply({3000, session::Command{session::CommandKind::Abort}});
  const auto record = record_from_state(e.state(), 0, {});
  CHECK(record.aborted_in() == "pairing");
  const auto row = report_row(record);
  CHECK(row.greetings == session::Code::C3);
  CHECK_FALSE(row.pairing.has_value());
  CHECK_FALSE(row.imitation.has_value());
  CHECK(row.status == session::SessionStatus::Aborted);
  CHECK(row.comment == "aborted in pairing");
  CHECK(compact_row(row) == "G | 3 |  |  | aborted in pairing");
}
