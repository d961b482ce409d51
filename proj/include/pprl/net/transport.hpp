#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>

#include "pprl/net/frame.hpp"

namespace pprl::net {

using Clock = std::chrono::steady_clock;
using Timeout = std::optional<std::chrono::milliseconds>;

class LinkClosed : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class LinkTimeout : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

/// Inbound frames of one link, dispatched by session id. FIFO within a
/// session.
class FrameQueue {
 public:
  void push(Frame frame);
  Frame pop(const SessionId& session, Timeout timeout = std::nullopt);
  Frame pop_any(Timeout timeout = std::nullopt);

  void close(std::string reason);
  bool closed() const;

  // Drops queued frames of a finished session and any that arrive later.
  void retire(const SessionId& session);

  // Called (outside the lock) the first time a frame of a new session arrives.
  void on_new_session(std::function<void(const SessionId&)> callback);

 private:
  template <typename Pred>
  Frame pop_if(Pred pred, Timeout timeout, const char* what);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Frame> frames_;
  std::set<SessionId> seen_;
  std::set<SessionId> retired_;
  std::function<void(const SessionId&)> new_session_;
  bool closed_ = false;
  std::string close_reason_;
};

struct LinkStats {
  std::atomic<std::uint64_t> bytes_sent{0};
  std::atomic<std::uint64_t> frames_sent{0};
};

/// One endpoint of a reliable, ordered, full-duplex frame channel.
class Link {
 public:
  virtual ~Link() = default;

  virtual void send(const Frame& frame) = 0;
  virtual FrameQueue& inbox() = 0;
  virtual void close() = 0;

  Frame recv(const SessionId& session, Timeout timeout = std::nullopt) {
    return inbox().pop(session, timeout);
  }

  LinkStats& stats() { return stats_; }

 protected:
  LinkStats stats_;
};

/// In-process link pair for tests and local clusters.
std::pair<std::shared_ptr<Link>, std::shared_ptr<Link>> make_memory_link_pair();

/// Frame channel over a connected TCP socket. A reader thread decodes
/// incoming frames into the inbox so senders never block on the peer's
/// reads.
class TcpLink : public Link {
 public:
  explicit TcpLink(int fd, std::size_t max_payload = kDefaultMaxPayload);
  ~TcpLink() override;
  TcpLink(const TcpLink&) = delete;
  TcpLink& operator=(const TcpLink&) = delete;

  void send(const Frame& frame) override;
  FrameQueue& inbox() override { return inbox_; }
  void close() override;

  // Blocking read of one frame before the reader thread starts (handshake).
  static Frame read_frame_blocking(int fd, std::size_t max_payload = kDefaultMaxPayload);
  static void write_frame_blocking(int fd, const Frame& frame);

 private:
  void read_loop();

  int fd_;
  std::size_t max_payload_;
  std::mutex write_mu_;
  FrameQueue inbox_;
  std::thread reader_;
  std::atomic<bool> closing_{false};
};

/// Added one-way latency and a bandwidth cap for one direction of a link.
struct LinkShape {
  std::chrono::microseconds latency{0};
  double bandwidth_bps = 0;  // 0 = unlimited

  bool active() const { return latency.count() > 0 || bandwidth_bps > 0; }
};

/// Delays outgoing frames as if sent over a link with the given shape.
/// Transmission is serialised (bandwidth), then each frame is held for the
/// latency before it is handed to the wrapped link.
class ShapedLink : public Link {
 public:
  ShapedLink(std::shared_ptr<Link> inner, LinkShape shape);
  ~ShapedLink() override;

  void send(const Frame& frame) override;
  FrameQueue& inbox() override { return inner_->inbox(); }
  void close() override;

 private:
  void pump();

  std::shared_ptr<Link> inner_;
  LinkShape shape_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<Clock::time_point, Frame>> pending_;
  Clock::time_point tx_free_ = Clock::time_point::min();
  bool stopping_ = false;
  std::thread worker_;
};

/// Named network conditions: A (wide area), B (wide area, 100 Mbps),
/// C (local network), off (no shaping).
struct NetPreset {
  std::string name = "off";
  LinkShape p0_p1;
  LinkShape p0_helper;
  LinkShape p1_helper;

  LinkShape between(Role a, Role b) const;
};

NetPreset net_preset(std::string_view name);

std::shared_ptr<Link> maybe_shape(std::shared_ptr<Link> link, const NetPreset& preset, Role self, Role peer);

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
};

Endpoint parse_endpoint(std::string_view text);

int listen_tcp(const Endpoint& ep, int backlog = 64);
int accept_tcp(int listen_fd);
int dial_tcp(const Endpoint& ep, std::chrono::milliseconds give_up_after);
void close_fd(int fd);

}  // namespace pprl::net
