#include "fixtures.hpp"

#include "cli.hpp"
#include "imitation/error.hpp"
#include "imitation/gateway/config.hpp"
#include "imitation/gateway/runner.hpp"
#include "imitation/gateway/server.hpp"
#include "imitation/io/openpose.hpp"
#include "imitation/io/replay.hpp"
#include "imitation/io/scenario.hpp"
#include "imitation/io/simulator.hpp"
#include "imitation/store/report.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

using namespace imitation;
using nlohmann::json;

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;

namespace {

io::ScenarioScript scripted(const std::string& id) {
  return io::load_scenario(fixtures::source_dir() / ("scenarios/session_" + id + ".json"));
}

std::string row_of(const store::SessionRecord& r) { return store::compact_row(store::report_row(r)); }

// Minimal console client. Reads give up after a timeout instead of hanging.
class Client {
 public:
  explicit Client(std::uint16_t port) : ws_(io_) {
    asio::ip::tcp::resolver resolver(io_);
    beast::get_lowest_layer(ws_).connect(*resolver.resolve("127.0.0.1", std::to_string(port)).begin());
    ws_.handshake("127.0.0.1", "/");
  }

  void send(const std::string& type, json body) {
    ws_.write(asio::buffer(json{{"type", type}, {"seq", ++seq_}, {"body", std::move(body)}}.dump()));
  }

  void send_raw(const std::string& text) { ws_.write(asio::buffer(text)); }

  std::optional<json> read(std::chrono::milliseconds timeout = std::chrono::milliseconds(3000)) {
    beast::flat_buffer buffer;
    bool done = false;
    beast::error_code failure;
    ws_.async_read(buffer, [&](beast::error_code ec, std::size_t) {
      done = true;
      failure = ec;
    });
    io_.restart();
    io_.run_for(timeout);
    if (!done) {
      beast::get_lowest_layer(ws_).cancel();
      io_.restart();
      io_.run();
      return std::nullopt;
    }
    if (failure) return std::nullopt;
    auto msg = json::parse(beast::buffers_to_string(buffer.data()));
    const auto seq = msg.at("seq").get<std::uint64_t>();
    CHECK(seq == last_seen_ + 1);
    last_seen_ = seq;
    return msg;
  }

  // Skips messages of other types.
  std::optional<json> read_type(const std::string& type) {
    for (int i = 0; i < 200; ++i) {
      auto m = read();
      if (!m) return std::nullopt;
      if ((*m)["type"] == type) return m;
    }
    return std::nullopt;
  }

  void close() { ws_.close(websocket::close_code::normal); }

 private:
  asio::io_context io_;
  websocket::stream<beast::tcp_stream> ws_;
  std::uint64_t seq_ = 0;
  std::uint64_t last_seen_ = 0;
};

int run_cli(std::vector<std::string> args, std::string& out, std::string& err) {
  args.insert(args.begin(), "imitation");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o;
  std::ostringstream e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str();
  err = e.str();
  return code;
}

}  // namespace

TEST_CASE("config survives a JSON round trip") {
  gateway::GatewayConfig c;
  c.listen = "0.0.0.0:9000";
  c.store = "/tmp/somewhere";
  c.rubric.wait_window_ms = 12000;
  c.match.attempt_energy_min = 0.05;
  c.runner.role_mode = gateway::RoleMode::ByOperator;
  c.template_files = {"a.json"};
  const auto back = gateway::config_from_json(gateway::to_json(c));
  CHECK(back == c);
  CHECK(gateway::to_json(back) == gateway::to_json(c));

  CHECK(gateway::config_from_json(json::object()) == gateway::GatewayConfig{});
  CHECK_THROWS_AS(gateway::config_from_json({{"replay_fps", "fast"}}), Error);
  try {
    (void)gateway::config_from_json({{"rubric", {{"wait_window_ms", -1}}}});
    FAIL("negative window accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidConfig);
  }
}

TEST_CASE("environment overrides listen and store") {
  ::setenv("IMITATION_LISTEN", "127.0.0.1:7001", 1);
  ::setenv("IMITATION_STORE", "/tmp/imitation-env-store", 1);
  gateway::GatewayConfig c;
  gateway::apply_env_overrides(c);
  ::unsetenv("IMITATION_LISTEN");
  ::unsetenv("IMITATION_STORE");
  CHECK(c.listen == "127.0.0.1:7001");
  REQUIRE(c.store);
  CHECK(*c.store == "/tmp/imitation-env-store");

  gateway::GatewayConfig untouched;
  gateway::apply_env_overrides(untouched);
  CHECK(untouched == gateway::GatewayConfig{});
}

TEST_CASE("template files join the builtin templates") {
  gateway::GatewayConfig c;
  c.template_files = {fixtures::source_dir() / "config/templates/raise_left_arm.json"};
  c.runner.movements = {"raise_left_arm"};
  c.rubric.movement_count = 1;
  const auto templates = gateway::resolve_templates(c);
  CHECK(gesture::find_template(templates, "raise_left_arm").keyframes.size() == 1);
  CHECK(gesture::find_template(templates, gesture::kRaiseArmsSky).name == gesture::kRaiseArmsSky);

  c.runner.movements = {"cartwheel"};
  try {
    (void)gateway::resolve_templates(c);
    FAIL("unknown movement accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownGesture);
  }
}

TEST_CASE("replayed frames reproduce the simulated session") {
  const auto script = scripted("H");
  const auto sim = io::simulate(script);
  fixtures::TempDir dir;
  for (std::size_t i = 0; i < sim.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu_keypoints.json", i);
    std::ofstream(dir.path() / name) << io::serialize_openpose_frame(sim.frames[i].skeletons);
  }
  const auto frames = io::replay_directory(dir.path(), script.fps);
  REQUIRE(frames.size() == sim.frames.size());

  const auto direct = gateway::run_scenario(script, gateway::GatewayConfig{});
  const auto replayed = gateway::run_frames(frames, script, gateway::GatewayConfig{});
  CHECK(row_of(replayed.record) == "H | 2 | 3 | 2a | imitation with objects");
  CHECK(row_of(replayed.record) == row_of(direct.record));
  CHECK(replayed.record.outcomes == direct.record.outcomes);
  CHECK(replayed.rejected_events == 0);
}

TEST_CASE("runner emits state and outcome messages") {
  const auto run = gateway::run_scenario(scripted("F"), gateway::GatewayConfig{}, nullptr, true);
  std::size_t outcomes = 0;
  bool saw_frame = false;
  for (const auto& m : run.messages) {
    if (m.type == "outcome") ++outcomes;
    if (m.type == "frame") saw_frame = true;
  }
  CHECK(saw_frame);
  // greetings, pairing, three movements and the aggregate
  CHECK(outcomes >= 5);
  const auto last_state = std::find_if(run.messages.rbegin(), run.messages.rend(),
                                       [](const gateway::WireEvent& m) { return m.type == "state"; });
  REQUIRE(last_state != run.messages.rend());
  CHECK(last_state->body["status"] == "completed");
}

TEST_CASE("console server handshake and roles") {
  io::BoundedQueue<gateway::ConsoleInput> inputs(16);
  gateway::ConsoleServer server("127.0.0.1:0", inputs);
  server.broadcast({"state", {{"clock", 42}}});

  Client op(server.port());
  op.send("hello", {{"role", "operator"}});
  auto hello = op.read_type("hello");
  REQUIRE(hello);
  CHECK((*hello)["body"]["accepted"] == true);
  CHECK((*hello)["body"]["state"]["clock"] == 42);

  Client second(server.port());
  second.send("hello", {{"role", "operator"}});
  auto refused = second.read_type("hello");
  REQUIRE(refused);
  CHECK((*refused)["body"]["accepted"] == false);
  CHECK((*refused)["body"]["error"] == "SecondOperator");

  Client watcher(server.port());
  watcher.send("hello", {{"role", "observer"}});
  REQUIRE(watcher.read_type("hello"));
  watcher.send("observe", {{"kind", "Smile"}});
  auto warned = watcher.read_type("warning");
  REQUIRE(warned);
  CHECK((*warned)["body"]["text"].get<std::string>().find("operator") != std::string::npos);

  op.send("observe", {{"kind", "Smile"}});
  op.send("observe", {{"kind", "Dance"}});
  auto input = inputs.pop_for(std::chrono::seconds(3));
  REQUIRE(input);
  CHECK(input->message["body"]["kind"] == "Smile");
  CHECK(op.read_type("warning"));

  op.send_raw(R"({"type":"observe","seq":1,"body":{"kind":"Smile"}})");
  auto stale = op.read_type("warning");
  REQUIRE(stale);
  CHECK((*stale)["body"]["text"].get<std::string>().find("seq") != std::string::npos);
  CHECK_FALSE(inputs.pop_for(std::chrono::milliseconds(100)));

  for (int i = 0; i < 5; ++i) server.broadcast({"suggestion", {{"n", i}}});
  for (int i = 0; i < 5; ++i) {
    auto m = watcher.read_type("suggestion");
    REQUIRE(m);
    CHECK((*m)["body"]["n"] == i);
  }
  server.send_to(999, {"warning", {{"text", "nobody"}}});
  op.close();
  watcher.close();
  server.stop();
}

TEST_CASE("console_event decodes operator messages") {
  const auto e = gateway::console_event({{"type", "observe"}, {"body", {{"kind", "HandHold"}}}}, 77);
  CHECK(e.timestamp_ms == 77);
  CHECK(std::get<session::OperatorObservation>(e.payload).kind == session::Observation::HandHold);
  const auto c = gateway::console_event(
      {{"type", "command"}, {"body", {{"kind", "AssignRole"}, {"track", 3}, {"role", "model"}}}}, 5);
  const auto& cmd = std::get<session::Command>(c.payload);
  CHECK(cmd.kind == session::CommandKind::AssignRole);
  CHECK(cmd.track == 3);
  CHECK(cmd.role == scene::Role::Model);
  CHECK_THROWS_AS(gateway::console_event({{"type", "frame"}}, 0), Error);
  CHECK_THROWS_AS(gateway::console_event({{"type", "command"}, {"body", {{"kind", "Jump"}}}}, 0), Error);
}

TEST_CASE("served session keeps running after the operator leaves") {
  gateway::GatewayConfig config;
  config.listen = "127.0.0.1:0";
  config.pose_listen = "127.0.0.1:0";
  config.rubric.wait_window_ms = 400;

  std::atomic<bool> stop{false};
  std::promise<std::uint16_t> ready;
  gateway::ServeOptions options;
  options.stop = &stop;
  options.on_ready = [&](std::uint16_t console, std::uint16_t) { ready.set_value(console); };

  store::SessionRecord record;
  std::thread server([&] { record = gateway::serve(config, fixtures::profile("G"), options); });
  auto port_future = ready.get_future();
  REQUIRE(port_future.wait_for(std::chrono::seconds(5)) == std::future_status::ready);
  const auto port = port_future.get();

  Client watcher(port);
  watcher.send("hello", {{"role", "observer"}});
  REQUIRE(watcher.read_type("hello"));
  {
    Client op(port);
    op.send("hello", {{"role", "operator"}});
    REQUIRE(op.read_type("hello"));
    op.send("command", {{"kind", "AdvancePhase"}});
    op.send("observe", {{"kind", "Smile"}});
    auto echo = op.read_type("observe");
    REQUIRE(echo);
    op.close();
  }

  // The greetings window expires on the server clock without any operator.
  bool paired = false;
  for (int i = 0; i < 100 && !paired; ++i) {
    auto m = watcher.read_type("state");
    if (!m) break;
    paired = (*m)["body"]["phase"]["kind"] == "pairing";
  }
  CHECK(paired);
  watcher.close();
  stop = true;
  server.join();

  REQUIRE_FALSE(record.outcomes.empty());
  CHECK(record.outcomes.front().phase == session::PhaseKind::Greetings);
  CHECK(record.outcomes.front().code == session::Code::C2);
  CHECK(record.status == session::SessionStatus::Aborted);
  bool smile_logged = false;
  for (const auto& e : record.log) {
    if (const auto* o = std::get_if<session::OperatorObservation>(&e.payload)) {
      smile_logged = smile_logged || o->kind == session::Observation::Smile;
    }
  }
  CHECK(smile_logged);
}

TEST_CASE("command line runs, validates and reports") {
  std::string out;
  std::string err;
  const auto scenario = (fixtures::source_dir() / "scenarios/session_F.json").string();
  CHECK(run_cli({"simulate", "--scenario", scenario, "--report"}, out, err) == 0);
  CHECK(out.find("F | 3 | 3 | 3a | imitation without objects") != std::string::npos);

  fixtures::TempDir dir;
  const auto body25 = dir.path() / "body25_keypoints.json";
  {
    json values = json::array();
    for (int i = 0; i < 75; ++i) values.push_back(1.0);
    std::ofstream(body25) << json{{"people", {{{"pose_keypoints_2d", values}}}}}.dump();
  }
  CHECK(run_cli({"validate", "--file", body25.string()}, out, err) == 1);
  CHECK(err.find("WrongKeypointCount") != std::string::npos);

  const auto empty = dir.path() / "empty";
  std::filesystem::create_directories(empty);
  CHECK(run_cli({"replay", "--dir", empty.string(), "--script", scenario}, out, err) == 1);
  CHECK(err.find("EmptyDirectory") != std::string::npos);

  CHECK(run_cli({"simulate"}, out, err) == 2);
  CHECK(err.find("usage") != std::string::npos);

  const auto store_dir = dir.path() / "store";
  CHECK(run_cli({"simulate", "--scenario", scenario, "--store", store_dir.string()}, out, err) == 0);
  CHECK(run_cli({"report", "--store", store_dir.string()}, out, err) == 0);
  CHECK(out.find("F-001") != std::string::npos);
}

TEST_CASE("dumped config reloads to identical behaviour") {
  std::string out;
  std::string err;
  REQUIRE(run_cli({"config", "--dump"}, out, err) == 0);
  fixtures::TempDir dir;
  const auto path = dir.path() / "config.json";
  std::ofstream(path) << out;
  const auto loaded = gateway::load_config(path);
  CHECK(loaded == gateway::GatewayConfig{});
  CHECK(gateway::load_config(fixtures::source_dir() / "config/default.json") == loaded);

  const auto script = scripted("I");
  const auto a = gateway::run_scenario(script, gateway::GatewayConfig{});
  const auto b = gateway::run_scenario(script, loaded);
  CHECK(a.record.log == b.record.log);
  CHECK(a.record.outcomes == b.record.outcomes);
}
