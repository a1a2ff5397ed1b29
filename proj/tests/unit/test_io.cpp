#include "fixtures.hpp"

#include "imitation/error.hpp"
#include "imitation/gateway/runner.hpp"
#include "imitation/gesture/matcher.hpp"
#include "imitation/io/live.hpp"
#include "imitation/io/openpose.hpp"
#include "imitation/io/queue.hpp"
#include "imitation/io/replay.hpp"
#include "imitation/io/scenario.hpp"
#include "imitation/io/simulator.hpp"

#include <boost/asio.hpp>
#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <thread>

using namespace imitation;
using nlohmann::json;

namespace {

std::string person(double neck_confidence, std::size_t values = 54) {
  json kp = json::array();
  for (std::size_t i = 0; i < values; ++i) kp.push_back(i % 3 == 2 ? 0.0 : 10.0 + i);
  if (values >= 6) kp[5] = neck_confidence;
  return json{{"people", json::array({json{{"pose_keypoints_2d", kp}}})}}.dump();
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
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

io::ScenarioScript script_with(std::vector<io::ScriptEntry> timeline, std::int64_t duration) {
  io::ScenarioScript s;
  s.name = "test";
  s.participant = fixtures::profile("F");
  s.duration_ms = duration;
  s.timeline = std::move(timeline);
  return s;
}

}  // namespace

TEST_CASE("openpose parsing") {
  CHECK(io::parse_openpose_frame(R"({"people":[]})").empty());

  const auto one = io::parse_openpose_frame(person(0.9));
  REQUIRE(one.size() == 1);
  CHECK(one[0].visible(pose::Joint::Neck));
  CHECK(one[0].point(pose::Joint::Neck).x() == 13.0);
  CHECK(one[0].point(pose::Joint::Neck).y() == 14.0);

  CHECK(code_of([] { (void)io::parse_openpose_frame(person(0.9, 75)); }) == Errc::WrongKeypointCount);
  CHECK(code_of([] { (void)io::parse_openpose_frame("garbage"); }) == Errc::MalformedJson);
  CHECK(code_of([] { (void)io::parse_openpose_frame(R"({"people":{}})"); }) == Errc::MalformedJson);
  auto text_value = json::parse(person(0.9));
  text_value["people"][0]["pose_keypoints_2d"][7] = "x";
  CHECK(code_of([&] { (void)io::parse_openpose_frame(text_value.dump()); }) == Errc::MalformedJson);
  // A person with no confident joint at all is not a detection.
  CHECK(io::parse_openpose_frame(person(0.0)).empty());
}

TEST_CASE("openpose serialization round trip") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    std::vector<pose::Skeleton> people{fixtures::random_skeleton(rng), fixtures::random_skeleton(rng)};
    for (auto& p : people) p.confidence(1) = 0.7;
    const auto text = io::serialize_openpose_frame(people);
    CHECK(text.find('\n') == std::string::npos);
    CHECK(io::parse_openpose_frame(text) == people);
  }
}

TEST_CASE("replay directory") {
  fixtures::TempDir dir;
  write(dir.path() / "take_000002_keypoints.json", person(0.9));
  write(dir.path() / "take_000001_keypoints.json", R"({"people":[]})");
  write(dir.path() / "take_000003_keypoints.json", person(0.5));
  write(dir.path() / "notes.txt", "ignored");

  io::ReplaySource src(dir.path(), 15.0);
  REQUIRE(src.size() == 3);
  CHECK(src.files()[0].filename() == "take_000001_keypoints.json");
  std::vector<std::int64_t> times;
  std::vector<std::size_t> counts;
  while (auto f = src.next()) {
    times.push_back(f->timestamp_ms);
    counts.push_back(f->skeletons.size());
    CHECK(f->source == pose::FrameSource::Replay);
  }
  CHECK(times == std::vector<std::int64_t>{0, 67, 133});
  CHECK(counts == std::vector<std::size_t>{0, 1, 1});
}

TEST_CASE("replay surfaces a bad file by name") {
  fixtures::TempDir dir;
  write(dir.path() / "a_000001_keypoints.json", person(0.9));
  write(dir.path() / "a_000002_keypoints.json", "{broken");
  io::ReplaySource src(dir.path(), 15.0);
  const auto first = src.next();
  REQUIRE(first.has_value());
  try {
    (void)src.next();
    FAIL("expected StreamError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StreamError);
    CHECK(std::string(e.what()).find("a_000002_keypoints.json") != std::string::npos);
  }
  CHECK(first->skeletons.size() == 1);
}

TEST_CASE("replay errors") {
  fixtures::TempDir dir;
  CHECK(code_of([&] { io::ReplaySource(dir.path(), 15.0); }) == Errc::EmptyDirectory);
  CHECK(code_of([&] { io::ReplaySource(dir.path() / "missing", 15.0); }) == Errc::EmptyDirectory);
  write(dir.path() / "x_keypoints.json", person(0.9));
  CHECK(code_of([&] { io::ReplaySource(dir.path(), 0.0); }) == Errc::InvalidConfig);
}

TEST_CASE("line decoder") {
  SUBCASE("one valid line") {
    io::LineDecoder d;
    const auto frames = d.feed(person(0.9) + "\n", 40);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].timestamp_ms == 40);
    CHECK(frames[0].source == pose::FrameSource::Live);
    CHECK(d.warning_count() == 0);
  }
  SUBCASE("garbage then a valid line") {
    io::LineDecoder d;
    const auto frames = d.feed("garbage\n" + person(0.9) + "\n", 0);
    CHECK(frames.size() == 1);
    CHECK(d.warning_count() == 1);
  }
  SUBCASE("explicit timestamps, regressing one is clamped") {
    io::LineDecoder d;
    auto doc = json::parse(person(0.9));
    doc["t_ms"] = 500;
    auto frames = d.feed(doc.dump() + "\n", 0);
    doc["t_ms"] = 400;
    const auto more = d.feed(doc.dump() + "\n", 0);
    REQUIRE(frames.size() == 1);
    REQUIRE(more.size() == 1);
    CHECK(frames[0].timestamp_ms == 500);
    CHECK(more[0].timestamp_ms == 500);
    CHECK(d.warning_count() == 1);
    doc["t_ms"] = 1.5;
    CHECK(d.feed(doc.dump() + "\n", 0).empty());
    CHECK(d.warning_count() == 2);
  }
  SUBCASE("partial lines are buffered") {
    io::LineDecoder d;
    const auto text = person(0.9);
    CHECK(d.feed(text.substr(0, 20), 0).empty());
    CHECK(d.feed(text.substr(20), 0).empty());
    CHECK(d.finish(10).size() == 1);
  }
  SUBCASE("overlong lines are skipped") {
    io::LineDecoder d(64);
    const auto frames = d.feed(std::string(200, 'x') + "\n" + R"({"people":[]})" + "\n", 0);
    CHECK(frames.size() == 1);
    CHECK(d.warning_count() == 1);
  }
}

TEST_CASE("bounded queue") {
  io::BoundedQueue<int> q(2, io::Overflow::DropOldest);
  q.push(1);
  q.push(2);
  q.push(3);
  CHECK(q.dropped() == 1);
  CHECK(q.pop() == 2);
  q.close();
  CHECK(q.pop() == 3);
  CHECK_FALSE(q.pop().has_value());
  CHECK_FALSE(q.push(4));
}

TEST_CASE("live listener over TCP") {
  io::BoundedQueue<pose::Frame> frames(64);
  io::LiveListener listener("127.0.0.1:0", frames);
  REQUIRE(listener.port() != 0);

  boost::asio::io_context io;
  boost::asio::ip::tcp::socket socket(io);
  socket.connect({boost::asio::ip::make_address("127.0.0.1"), listener.port()});
  auto doc = json::parse(person(0.9));
  doc["t_ms"] = 66;
  const std::string payload = "not json\n" + doc.dump() + "\n";
  boost::asio::write(socket, boost::asio::buffer(payload));

  const auto f = frames.pop_for(std::chrono::seconds(5));
  REQUIRE(f.has_value());
  CHECK(f->timestamp_ms == 66);
  CHECK(f->skeletons.size() == 1);
  socket.close();
  listener.stop();
  CHECK(listener.warning_count() == 1);
}

TEST_CASE("live listener bind failure") {
  io::BoundedQueue<pose::Frame> frames(4);
  io::LiveListener first("127.0.0.1:0", frames);
  const auto endpoint = "127.0.0.1:" + std::to_string(first.port());
  CHECK(code_of([&] { io::LiveListener second(endpoint, frames); }) == Errc::BindFailure);
  CHECK(code_of([] { (void)io::parse_endpoint("no-port"); }) == Errc::InvalidConfig);
  CHECK(io::parse_endpoint(":8766") == std::pair<std::string, std::uint16_t>{"", 8766});
}

TEST_CASE("scenario JSON") {
  const auto s = io::load_scenario(fixtures::source_dir() / "scenarios/session_H.json");
  CHECK(s.participant.id == "H");
  CHECK(io::scenario_from_json(io::to_json(s)).timeline.size() == s.timeline.size());
  CHECK(io::to_json(io::scenario_from_json(io::to_json(s))) == io::to_json(s));

  auto bad = io::to_json(s);
  bad["timeline"][0]["at_ms"] = 999999;
  CHECK(code_of([&] { (void)io::scenario_from_json(bad); }) == Errc::InvalidScript);
  auto no_fps = io::to_json(s);
  no_fps["fps"] = 0;
  CHECK(code_of([&] { (void)io::scenario_from_json(no_fps); }) == Errc::InvalidScript);
}

TEST_CASE("simulated perform is matched") {
  for (const auto& t : gesture::builtin_templates()) {
    io::Perform p;
    p.gesture = t.name;
    const auto script = script_with({{0, io::Actor::Participant, p}}, 6000);
    const auto sim = io::simulate(script);
    std::vector<gesture::PoseSample> samples;
    for (const auto& f : sim.frames) {
      REQUIRE(!f.skeletons.empty());
      samples.push_back(gesture::make_sample(f.timestamp_ms, f.skeletons.back()));
    }
    const auto r = gesture::match_gesture(samples, t);
    CHECK_MESSAGE(r.status == gesture::MatchStatus::Success, t.name);
    CHECK(r.chirality == gesture::Chirality::Direct);
  }
}

TEST_CASE("simulator is deterministic and timestamps follow the fps") {
  const auto script = io::load_scenario(fixtures::source_dir() / "scenarios/session_I.json");
  const auto a = io::simulate(script);
  const auto b = io::simulate(script);
  REQUIRE(a.frames.size() == b.frames.size());
  std::string sa;
  std::string sb;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(a.frames[i].timestamp_ms == io::replay_timestamp(i, script.fps));
    sa += io::serialize_openpose_frame(a.frames[i].skeletons);
    sb += io::serialize_openpose_frame(b.frames[i].skeletons);
  }
  CHECK(sa == sb);
  auto other = script;
  other.seed = 2;
  CHECK(io::serialize_openpose_frame(io::simulate(other).frames[10].skeletons) !=
        io::serialize_openpose_frame(a.frames[10].skeletons));
}

TEST_CASE("idle session without observations scores greetings 1") {
  io::IssueCommand prompt{session::Command{session::CommandKind::AdvancePhase}};
  const auto script = script_with({{0, io::Actor::Participant, prompt}}, 40000);
  const auto result = gateway::run_scenario(script, gateway::GatewayConfig{});
  REQUIRE(!result.record.outcomes.empty());
  CHECK(result.record.outcomes[0].phase == session::PhaseKind::Greetings);
  CHECK(result.record.outcomes[0].code == session::Code::C1);
}

TEST_CASE("unknown gesture in a script") {
  io::Perform p;
  p.gesture = "cartwheel";
  const auto script = script_with({{0, io::Actor::Participant, p}}, 1000);
  CHECK(code_of([&] { (void)io::simulate(script); }) == Errc::UnknownGesture);
}
