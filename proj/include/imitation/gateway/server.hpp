#pragma once

#include "imitation/gateway/runner.hpp"
#include "imitation/io/queue.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

namespace imitation::gateway {

// Console protocol over WebSocket. Every message in either direction is
//   {"type": <frame|state|outcome|suggestion|warning|observe|command|hello>,
//    "seq": <integer, strictly increasing per direction per connection>,
//    "body": {...}}
// A client opens with hello {"role": "operator" | "observer"}. Only one
// operator may be connected; a second is answered with
// hello {"accepted": false, "error": "SecondOperator"} and closed. Only the
// operator's observe and command messages reach the engine.
// The full reference is docs/console-protocol.md.

struct ConsoleInput {
  std::uint64_t connection = 0;
  nlohmann::json message;  // validated observe or command message
};

class ConsoleServer {
 public:
  // Throws Error(BindFailure).
  ConsoleServer(const std::string& endpoint, io::BoundedQueue<ConsoleInput>& inputs);
  ~ConsoleServer();
  ConsoleServer(const ConsoleServer&) = delete;
  ConsoleServer& operator=(const ConsoleServer&) = delete;

  std::uint16_t port() const;
  // Thread-safe fan-out; each connection stamps its own sequence number.
  // The latest "state" body is kept for the hello reply of late joiners.
  void broadcast(const WireEvent& event);
  // Sends to one connection only (e.g. a rejection warning).
  void send_to(std::uint64_t connection, const WireEvent& event);
  std::size_t connection_count() const;
  void stop();

 private:
  struct Core;
  std::shared_ptr<Core> core_;
};

// Decodes an operator message into a session event stamped at t_ms. Throws
// Error(MalformedJson) for unknown kinds or shapes.
session::SessionEvent console_event(const nlohmann::json& message, std::int64_t t_ms);

struct ServeOptions {
  enum class Source { Live, Simulate } source = Source::Live;
  std::filesystem::path scenario;  // Simulate only
  double speed = 1.0;              // simulated seconds per wall second
  std::atomic<bool>* stop = nullptr;
  // Called once the console port is bound (tests use it to learn the port).
  std::function<void(std::uint16_t console_port, std::uint16_t pose_port)> on_ready;
};

// Runs one session until it ends, the source is exhausted or *stop is set.
// Returns the session record (also stored when config.store is set).
store::SessionRecord serve(const GatewayConfig& config, const store::ParticipantProfile& participant,
                           const ServeOptions& options);

}  // namespace imitation::gateway
