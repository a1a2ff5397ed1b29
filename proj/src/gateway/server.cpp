#include "imitation/gateway/server.hpp"

#include "imitation/error.hpp"
#include "imitation/io/live.hpp"
#include "imitation/io/scenario.hpp"
#include "imitation/io/simulator.hpp"
#include "imitation/session/codec.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

namespace imitation::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using asio::ip::tcp;
using nlohmann::json;

namespace {

enum class ClientRole { Pending, Operator, Observer };

std::string frame_message(const std::string& type, std::uint64_t seq, const json& body) {
  return json{{"type", type}, {"seq", seq}, {"body", body}}.dump();
}

}  // namespace

struct ConsoleServer::Core : std::enable_shared_from_this<ConsoleServer::Core> {
  class Connection;

  asio::io_context io;
  tcp::acceptor acceptor{io};
  io::BoundedQueue<ConsoleInput>& inputs;
  std::thread thread;
  std::uint16_t bound_port = 0;

  // Touched only on the io thread.
  std::map<std::uint64_t, std::shared_ptr<Connection>> connections;
  std::optional<std::uint64_t> operator_id;
  json latest_state = json::object();
  std::uint64_t next_id = 1;
  std::atomic<std::size_t> connection_total{0};

  explicit Core(io::BoundedQueue<ConsoleInput>& q) : inputs(q) {}

  void accept();
  void remove(std::uint64_t id);
};

class ConsoleServer::Core::Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Core& core, std::uint64_t id)
      : ws_(std::move(socket)), core_(core), id_(id) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) {
        self->core_.remove(self->id_);
        return;
      }
      self->read();
    });
  }

  void send(const std::string& type, const json& body) {
    if (closing_) return;
    outbox_.push_back(frame_message(type, ++out_seq_, body));
    if (outbox_.size() == 1) write();
  }

  void send_and_close(const std::string& type, const json& body) {
    send(type, body);
    closing_ = true;
    if (outbox_.empty()) close();
  }

  ClientRole role() const { return role_; }

  void close() {
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) { self->core_.remove(self->id_); });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->core_.remove(self->id_);
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->on_message(text);
      if (!self->closing_) self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->core_.remove(self->id_);
                        return;
                      }
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) {
                        self->write();
                      } else if (self->closing_) {
                        self->close();
                      }
                    });
  }

  void reject(const std::string& reason) { send("warning", {{"text", reason}}); }

  void on_message(const std::string& text) {
    const json msg = json::parse(text, nullptr, false);
    if (msg.is_discarded() || !msg.is_object() || !msg.contains("type") || !msg["type"].is_string() ||
        !msg.contains("seq") || !msg["seq"].is_number_unsigned()) {
      reject("malformed message ignored");
      return;
    }
    const auto seq = msg["seq"].get<std::uint64_t>();
    if (in_seq_ && seq <= *in_seq_) {
      reject("non-increasing seq " + std::to_string(seq) + " ignored");
      return;
    }
    in_seq_ = seq;
    const auto type = msg["type"].get<std::string>();
    const json body = msg.value("body", json::object());

    if (type == "hello") {
      hello(body);
      return;
    }
    if (type != "observe" && type != "command") {
      reject("unsupported message type '" + type + "'");
      return;
    }
    if (role_ != ClientRole::Operator) {
      reject("only the operator may send " + type);
      return;
    }
    try {
      (void)console_event(msg, 0);
    } catch (const Error& e) {
      reject(e.what());
      return;
    }
    core_.inputs.push(ConsoleInput{id_, msg});
  }

  void hello(const json& body) {
    if (role_ != ClientRole::Pending) {
      reject("hello already received");
      return;
    }
    const auto wanted = body.value("role", std::string("observer"));
    if (wanted == "operator") {
      if (core_.operator_id) {
        send_and_close("hello", {{"accepted", false},
                                 {"error", "SecondOperator"},
                                 {"reason", "an operator is already connected"}});
        return;
      }
      core_.operator_id = id_;
      role_ = ClientRole::Operator;
    } else if (wanted == "observer") {
      role_ = ClientRole::Observer;
    } else {
      send_and_close("hello", {{"accepted", false}, {"error", "InvalidRole"}, {"reason", wanted}});
      return;
    }
    send("hello", {{"accepted", true},
                   {"role", wanted},
                   {"protocol", 1},
                   {"connection", id_},
                   {"state", core_.latest_state}});
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  Core& core_;
  std::uint64_t id_;
  std::uint64_t out_seq_ = 0;
  std::optional<std::uint64_t> in_seq_;
  ClientRole role_ = ClientRole::Pending;
  bool closing_ = false;
};

void ConsoleServer::Core::accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    const auto id = self->next_id++;
    auto conn = std::make_shared<Connection>(std::move(socket), *self, id);
    self->connections.emplace(id, conn);
    ++self->connection_total;
    conn->start();
    self->accept();
  });
}

void ConsoleServer::Core::remove(std::uint64_t id) {
  if (connections.erase(id) > 0) --connection_total;
  if (operator_id == id) operator_id.reset();
}

ConsoleServer::ConsoleServer(const std::string& endpoint, io::BoundedQueue<ConsoleInput>& inputs)
    : core_(std::make_shared<Core>(inputs)) {
  const auto [host, port] = io::parse_endpoint(endpoint);
  try {
    const auto address = host.empty() ? asio::ip::address_v4::any() : asio::ip::make_address(host);
    const tcp::endpoint ep(address, port);
    core_->acceptor.open(ep.protocol());
    core_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    core_->acceptor.bind(ep);
    core_->acceptor.listen();
    core_->bound_port = core_->acceptor.local_endpoint().port();
  } catch (const std::exception& e) {
    throw Error(Errc::BindFailure, endpoint + ": " + e.what());
  }
  core_->accept();
  core_->thread = std::thread([core = core_] { core->io.run(); });
}

ConsoleServer::~ConsoleServer() { stop(); }

std::uint16_t ConsoleServer::port() const { return core_->bound_port; }

std::size_t ConsoleServer::connection_count() const { return core_->connection_total; }

void ConsoleServer::broadcast(const WireEvent& event) {
  asio::post(core_->io, [core = core_, event] {
    if (event.type == "state") core->latest_state = event.body;
    // Copy: a failing send may remove the connection from the map.
    const auto targets = core->connections;
    for (const auto& [id, conn] : targets) {
      if (conn->role() != ClientRole::Pending) conn->send(event.type, event.body);
    }
  });
}

void ConsoleServer::send_to(std::uint64_t connection, const WireEvent& event) {
  asio::post(core_->io, [core = core_, connection, event] {
    if (const auto it = core->connections.find(connection); it != core->connections.end()) {
      it->second->send(event.type, event.body);
    }
  });
}

void ConsoleServer::stop() {
  if (!core_->thread.joinable()) return;
  asio::post(core_->io, [core = core_] {
    beast::error_code ec;
    core->acceptor.close(ec);
    const auto targets = core->connections;
    for (const auto& [id, conn] : targets) conn->close();
  });
  // Give pending closes a moment, then stop the loop regardless.
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  core_->io.stop();
  core_->thread.join();
}

session::SessionEvent console_event(const json& message, std::int64_t t_ms) {
  const auto type = message.value("type", std::string());
  const json body = message.value("body", json::object());
  if (!body.is_object()) throw Error(Errc::MalformedJson, "body must be an object");
  if (type == "observe") {
    const auto kind = body.value("kind", std::string());
    const auto o = session::observation_from_name(kind);
    if (!o) throw Error(Errc::MalformedJson, "unknown observation '" + kind + "'");
    return {t_ms, session::OperatorObservation{*o}};
  }
  if (type == "command") {
    auto c = session::command_from_json(body);
    return {t_ms, c};
  }
  throw Error(Errc::MalformedJson, "not an operator message: '" + type + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

bool stop_requested(const ServeOptions& o) {
  return o.stop != nullptr && o.stop->load();
}

void apply_logged(SessionRunner& runner, const session::SessionEvent& e,
                  std::optional<std::pair<ConsoleServer*, std::uint64_t>> origin = {}) {
  try {
    runner.on_event(e);
  } catch (const Error& err) {
    const std::string text = std::string("event rejected: ") + err.what();
    if (origin) {
      origin->first->send_to(origin->second, {"warning", {{"text", text}}});
    } else {
      runner.add_warning(text);
    }
  }
}

}  // namespace

store::SessionRecord serve(const GatewayConfig& config, const store::ParticipantProfile& participant,
                           const ServeOptions& options) {
  if (options.speed <= 0.0) throw Error(Errc::InvalidConfig, "speed must be positive");

  std::optional<io::ScenarioScript> script;
  GatewayConfig cfg = config;
  if (options.source == ServeOptions::Source::Simulate) {
    script = io::load_scenario(options.scenario);
    cfg.runner.model_on = script->scene.model_on;
  }

  std::optional<store::SessionStore> store;
  store::ParticipantRegistry local;
  session::SessionState initial;
  if (cfg.store) {
    store.emplace(*cfg.store);
    if (!store->registry().contains(participant.id)) store->register_participant(participant);
    const auto id = store->create_session(participant.id, cfg.rubric);
    initial = session::start_session(store->registry(), participant.id, cfg.rubric, id);
  } else {
    local.register_participant(participant);
    initial = session::start_session(local, participant.id, cfg.rubric);
  }

  io::BoundedQueue<ConsoleInput> console_inputs(256);
  io::BoundedQueue<pose::Frame> frames(256, io::Overflow::DropOldest);
  ConsoleServer server(cfg.listen, console_inputs);
  std::optional<io::LiveListener> listener;
  if (!script) listener.emplace(cfg.pose_listen, frames);

  SessionRunner runner(cfg, std::move(initial), store ? &*store : nullptr,
                       std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count());
  runner.on_output = [&](const WireEvent& m) { server.broadcast(m); };
  server.broadcast({"state", runner.state_json()});
  if (options.on_ready) options.on_ready(server.port(), listener ? listener->port() : 0);

  std::optional<io::Simulator> sim;
  if (script) sim.emplace(*script, resolve_templates(cfg));
  const auto start = Clock::now();
  // Session time: wall time since start, scaled when simulating.
  const auto session_now = [&] {
    return static_cast<std::int64_t>(static_cast<double>(elapsed_ms(start)) * options.speed);
  };

  std::int64_t next_tick = 0;
  while (!stop_requested(options) && !runner.state().finished()) {
    if (sim) {
      if (sim->done()) break;
      const auto t = session_now();
      while (!sim->done() && sim->next_timestamp() <= t) {
        const auto frame = sim->next_frame();
        for (const auto& e : sim->take_events_until(frame.timestamp_ms)) apply_logged(runner, e);
        runner.on_frame(frame);
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    } else if (auto f = frames.pop_for(std::chrono::milliseconds(10))) {
      runner.on_frame(*f);
      while (auto more = frames.pop_for(std::chrono::milliseconds(0))) runner.on_frame(*more);
    }

    while (auto input = console_inputs.pop_for(std::chrono::milliseconds(0))) {
      const auto t = std::max(runner.state().clock, session_now());
      session::SessionEvent e;
      try {
        e = console_event(input->message, t);
      } catch (const Error& err) {
        server.send_to(input->connection, {"warning", {{"text", err.what()}}});
        continue;
      }
      apply_logged(runner, e, std::pair{&server, input->connection});
    }

    const auto now = session_now();
    if (now >= next_tick) {
      runner.tick(std::max(runner.state().clock, now));
      next_tick = now + static_cast<std::int64_t>(100.0 * options.speed);
    }
  }

  if (listener) {
    listener->stop();
    if (listener->warning_count() > 0) {
      runner.add_warning(std::to_string(listener->warning_count()) + " malformed pose lines skipped");
    }
  }
  runner.finish();
  server.broadcast({"state", runner.state_json()});
  server.stop();
  return runner.record();
}

}  // namespace imitation::gateway
