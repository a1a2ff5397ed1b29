#include "imitation/io/live.hpp"

#include "imitation/error.hpp"
#include "imitation/io/openpose.hpp"

#include <boost/asio.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <list>
#include <mutex>
#include <thread>

namespace imitation::io {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

constexpr std::size_t kRecentWarnings = 64;

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

void LineDecoder::warn(std::string message) {
  ++warning_count_;
  if (recent_.size() == kRecentWarnings) recent_.erase(recent_.begin());
  recent_.push_back(std::move(message));
}

std::optional<pose::Frame> LineDecoder::decode_line(std::string_view line, std::int64_t arrival_ms) {
  line = trim_cr(line);
  if (line.empty()) return std::nullopt;

  const auto doc = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (doc.is_discarded()) {
    warn("malformed line skipped: not JSON");
    return std::nullopt;
  }
  std::int64_t t = arrival_ms;
  if (doc.is_object()) {
    if (const auto it = doc.find("t_ms"); it != doc.end()) {
      if (!it->is_number_integer()) {
        warn("malformed line skipped: t_ms is not an integer");
        return std::nullopt;
      }
      t = it->get<std::int64_t>();
    }
  }
  pose::Frame frame;
  try {
    frame.skeletons = parse_openpose_document(doc);
  } catch (const Error& e) {
    warn(std::string("malformed line skipped: ") + e.what());
    return std::nullopt;
  }
  if (last_timestamp_ && t < *last_timestamp_) {
    warn("timestamp " + std::to_string(t) + " regressed; clamped to " +
         std::to_string(*last_timestamp_));
    t = *last_timestamp_;
  }
  last_timestamp_ = t;
  frame.timestamp_ms = t;
  frame.source = pose::FrameSource::Live;
  ++frames_;
  return frame;
}

std::vector<pose::Frame> LineDecoder::feed(std::string_view bytes, std::int64_t arrival_ms) {
  std::vector<pose::Frame> out;
  while (!bytes.empty()) {
    const auto nl = bytes.find('\n');
    const auto chunk = bytes.substr(0, nl);
    if (discarding_) {
      if (nl != std::string_view::npos) discarding_ = false;
    } else if (pending_.size() + chunk.size() > max_line_bytes_) {
      warn("overlong line skipped");
      pending_.clear();
      discarding_ = nl == std::string_view::npos;
    } else if (nl == std::string_view::npos) {
      pending_.append(chunk);
    } else if (pending_.empty()) {
      if (auto f = decode_line(chunk, arrival_ms)) out.push_back(std::move(*f));
    } else {
      pending_.append(chunk);
      if (auto f = decode_line(pending_, arrival_ms)) out.push_back(std::move(*f));
      pending_.clear();
    }
    if (nl == std::string_view::npos) break;
    bytes.remove_prefix(nl + 1);
  }
  return out;
}

std::vector<pose::Frame> LineDecoder::finish(std::int64_t arrival_ms) {
  std::vector<pose::Frame> out;
  if (!discarding_ && !pending_.empty()) {
    if (auto f = decode_line(pending_, arrival_ms)) out.push_back(std::move(*f));
  }
  pending_.clear();
  discarding_ = false;
  return out;
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::InvalidConfig, "endpoint needs host:port");
  const auto port_text = endpoint.substr(colon + 1);
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw Error(Errc::InvalidConfig, "bad port in '" + endpoint + "'");
  return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

struct LiveListener::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  BoundedQueue<pose::Frame>& frames;
  std::chrono::steady_clock::time_point epoch = std::chrono::steady_clock::now();
  std::atomic<std::size_t> warnings{0};
  std::atomic<bool> stopping{false};
  tcp::endpoint bound;
  std::thread accept_thread;
  std::mutex mutex;
  std::list<std::shared_ptr<tcp::socket>> sockets;
  std::list<std::thread> readers;

  explicit Impl(BoundedQueue<pose::Frame>& q) : frames(q) {}

  std::int64_t now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 epoch)
        .count();
  }

  void serve(std::shared_ptr<tcp::socket> socket) {
    LineDecoder decoder;
    std::array<char, 8192> buffer{};
    std::size_t reported = 0;
    const auto deliver = [&](std::vector<pose::Frame> batch) {
      for (auto& f : batch) frames.push(std::move(f));
      warnings += decoder.warning_count() - reported;
      reported = decoder.warning_count();
    };
    for (;;) {
      boost::system::error_code ec;
      const auto n = socket->read_some(asio::buffer(buffer), ec);
      if (ec) break;
      deliver(decoder.feed(std::string_view(buffer.data(), n), now_ms()));
    }
    deliver(decoder.finish(now_ms()));
  }

  void accept_loop() {
    while (!stopping) {
      auto socket = std::make_shared<tcp::socket>(io);
      boost::system::error_code ec;
      acceptor.accept(*socket, ec);
      if (ec) {
        if (stopping) break;
        continue;
      }
      std::lock_guard lock(mutex);
      sockets.push_back(socket);
      readers.emplace_back([this, socket] { serve(socket); });
    }
  }
};

LiveListener::LiveListener(const std::string& endpoint, BoundedQueue<pose::Frame>& frames)
    : impl_(std::make_unique<Impl>(frames)) {
  const auto [host, port] = parse_endpoint(endpoint);
  try {
    const auto address = host.empty() ? asio::ip::address_v4::any() : asio::ip::make_address(host);
    const tcp::endpoint ep(address, port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
    impl_->bound = impl_->acceptor.local_endpoint();
  } catch (const std::exception& e) {
    throw Error(Errc::BindFailure, endpoint + ": " + e.what());
  }
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

LiveListener::~LiveListener() { stop(); }

std::uint16_t LiveListener::port() const { return impl_->bound.port(); }

std::size_t LiveListener::warning_count() const { return impl_->warnings; }

void LiveListener::stop() {
  if (impl_->stopping.exchange(true)) return;
  boost::system::error_code ec;
  // Closing the acceptor from another thread races the blocking accept; a
  // throwaway connection wakes it instead.
  if (impl_->accept_thread.joinable()) {
    auto target = impl_->bound;
    if (target.address().is_unspecified()) target.address(asio::ip::address_v4::loopback());
    asio::io_context io;
    tcp::socket poke(io);
    poke.connect(target, ec);
    impl_->accept_thread.join();
  }
  impl_->acceptor.close(ec);
  std::lock_guard lock(impl_->mutex);
  for (auto& s : impl_->sockets) {
    s->shutdown(tcp::socket::shutdown_both, ec);
    s->close(ec);
  }
  for (auto& t : impl_->readers) {
    if (t.joinable()) t.join();
  }
}

}  // namespace imitation::io
