#include "pprl/net/transport.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace pprl::net {

// ---------------------------------------------------------------- FrameQueue

void FrameQueue::push(Frame frame) {
  std::function<void(const SessionId&)> notify;
  SessionId session = frame.session;
  {
    std::lock_guard lock(mu_);
    if (retired_.contains(frame.session)) return;
    if (seen_.insert(frame.session).second && new_session_) notify = new_session_;
    frames_.push_back(std::move(frame));
  }
  cv_.notify_all();
  if (notify) notify(session);
}

template <typename Pred>
Frame FrameQueue::pop_if(Pred pred, Timeout timeout, const char* what) {
  std::unique_lock lock(mu_);
  const auto deadline = timeout ? Clock::now() + *timeout : Clock::time_point::max();
  for (;;) {
    for (auto it = frames_.begin(); it != frames_.end(); ++it) {
      if (pred(*it)) {
        Frame f = std::move(*it);
        frames_.erase(it);
        return f;
      }
    }
    if (closed_) throw LinkClosed(std::string("link closed while waiting for ") + what + ": " + close_reason_);
    if (timeout) {
      if (cv_.wait_until(lock, deadline) == std::cv_status::timeout && Clock::now() >= deadline)
        throw LinkTimeout(std::string("timed out waiting for ") + what);
    } else {
      cv_.wait(lock);
    }
  }
}

Frame FrameQueue::pop(const SessionId& session, Timeout timeout) {
  return pop_if([&](const Frame& f) { return f.session == session; }, timeout, "session frame");
}

Frame FrameQueue::pop_any(Timeout timeout) {
  return pop_if([](const Frame&) { return true; }, timeout, "frame");
}

void FrameQueue::close(std::string reason) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    closed_ = true;
    close_reason_ = std::move(reason);
  }
  cv_.notify_all();
}

bool FrameQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

void FrameQueue::retire(const SessionId& session) {
  std::lock_guard lock(mu_);
  retired_.insert(session);
  seen_.erase(session);
  std::erase_if(frames_, [&](const Frame& f) { return f.session == session; });
}

void FrameQueue::on_new_session(std::function<void(const SessionId&)> callback) {
  std::set<SessionId> pending;
  {
    std::lock_guard lock(mu_);
    new_session_ = callback;
    for (const auto& f : frames_) pending.insert(f.session);
  }
  // Sessions whose first frame arrived before the callback was installed.
  if (callback)
    for (const auto& id : pending) callback(id);
}

// ---------------------------------------------------------------- memory link

namespace {

class MemoryLink : public Link {
 public:
  MemoryLink(std::shared_ptr<FrameQueue> in, std::shared_ptr<FrameQueue> out)
      : in_(std::move(in)), out_(std::move(out)) {}

  void send(const Frame& frame) override {
    if (out_->closed()) throw LinkClosed("memory link closed");
    stats_.bytes_sent += frame.wire_size();
    stats_.frames_sent += 1;
    out_->push(frame);
  }
  FrameQueue& inbox() override { return *in_; }
  void close() override {
    out_->close("peer closed");
    in_->close("closed locally");
  }

 private:
  std::shared_ptr<FrameQueue> in_;
  std::shared_ptr<FrameQueue> out_;
};

}  // namespace

std::pair<std::shared_ptr<Link>, std::shared_ptr<Link>> make_memory_link_pair() {
  auto a_in = std::make_shared<FrameQueue>();
  auto b_in = std::make_shared<FrameQueue>();
  return {std::make_shared<MemoryLink>(a_in, b_in), std::make_shared<MemoryLink>(b_in, a_in)};
}

// ---------------------------------------------------------------- TCP link

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
  while (len > 0) {
    const ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw LinkClosed(std::string("send failed: ") + std::strerror(errno));
    }
    data += n;
    len -= static_cast<std::size_t>(n);
  }
}

void read_all(int fd, std::uint8_t* data, std::size_t len) {
  while (len > 0) {
    const ssize_t n = ::recv(fd, data, len, 0);
    if (n == 0) throw LinkClosed("connection closed by peer");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw LinkClosed(std::string("recv failed: ") + std::strerror(errno));
    }
    data += n;
    len -= static_cast<std::size_t>(n);
  }
}

}  // namespace

TcpLink::TcpLink(int fd, std::size_t max_payload) : fd_(fd), max_payload_(max_payload) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  reader_ = std::thread([this] { read_loop(); });
}

TcpLink::~TcpLink() {
  close();
  if (reader_.joinable()) reader_.join();
  ::close(fd_);
}

void TcpLink::send(const Frame& frame) {
  const auto bytes = encode_frame(frame);
  std::lock_guard lock(write_mu_);
  write_all(fd_, bytes.data(), bytes.size());
  stats_.bytes_sent += bytes.size();
  stats_.frames_sent += 1;
}

void TcpLink::close() {
  if (!closing_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
}

void TcpLink::read_loop() {
  FrameDecoder decoder(max_payload_);
  std::vector<std::uint8_t> buf(1 << 16);
  try {
    for (;;) {
      const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
      if (n == 0) break;
      if (n < 0) {
        if (errno == EINTR) continue;
        throw LinkClosed(std::string("recv failed: ") + std::strerror(errno));
      }
      decoder.feed(std::span(buf.data(), static_cast<std::size_t>(n)));
      while (auto f = decoder.next()) inbox_.push(std::move(*f));
    }
    inbox_.close(closing_ ? "closed locally" : "connection closed by peer");
  } catch (const std::exception& e) {
    inbox_.close(e.what());
    ::shutdown(fd_, SHUT_RDWR);
  }
}

Frame TcpLink::read_frame_blocking(int fd, std::size_t max_payload) {
  std::vector<std::uint8_t> head(kFrameHeaderSize);
  read_all(fd, head.data(), head.size());
  const std::uint32_t len = std::uint32_t{head[0]} | std::uint32_t{head[1]} << 8 |
                            std::uint32_t{head[2]} << 16 | std::uint32_t{head[3]} << 24;
  if (len > max_payload) throw ProtocolError("frame payload exceeds the limit");
  head.resize(kFrameHeaderSize + len);
  read_all(fd, head.data() + kFrameHeaderSize, len);
  return decode_frame(head);
}

void TcpLink::write_frame_blocking(int fd, const Frame& frame) {
  const auto bytes = encode_frame(frame);
  write_all(fd, bytes.data(), bytes.size());
}

// ---------------------------------------------------------------- shaping

ShapedLink::ShapedLink(std::shared_ptr<Link> inner, LinkShape shape)
    : inner_(std::move(inner)), shape_(shape), worker_([this] { pump(); }) {}

ShapedLink::~ShapedLink() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void ShapedLink::send(const Frame& frame) {
  const auto now = Clock::now();
  {
    std::lock_guard lock(mu_);
    auto tx_start = std::max(now, tx_free_);
    auto tx_time = std::chrono::nanoseconds(0);
    if (shape_.bandwidth_bps > 0)
      tx_time = std::chrono::nanoseconds(static_cast<std::int64_t>(
          static_cast<double>(frame.wire_size()) * 8.0 * 1e9 / shape_.bandwidth_bps));
    tx_free_ = tx_start + tx_time;
    pending_.emplace_back(tx_free_ + shape_.latency, frame);
  }
  stats_.bytes_sent += frame.wire_size();
  stats_.frames_sent += 1;
  cv_.notify_all();
}

void ShapedLink::close() { inner_->close(); }

void ShapedLink::pump() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [&] { return stopping_ || !pending_.empty(); });
    if (pending_.empty()) return;  // stopping with nothing left
    const auto release = pending_.front().first;
    if (Clock::now() < release && !stopping_) {
      cv_.wait_until(lock, release);
      continue;
    }
    Frame f = std::move(pending_.front().second);
    pending_.pop_front();
    lock.unlock();
    try {
      inner_->send(f);
    } catch (const std::exception&) {
      // The receiving side observes the closed link.
    }
    lock.lock();
  }
}

LinkShape NetPreset::between(Role a, Role b) const {
  auto is = [&](Role x, Role y) { return (a == x && b == y) || (a == y && b == x); };
  if (is(Role::P0, Role::P1)) return p0_p1;
  if (is(Role::P0, Role::Helper)) return p0_helper;
  if (is(Role::P1, Role::Helper)) return p1_helper;
  return {};
}

NetPreset net_preset(std::string_view name) {
  using std::chrono::microseconds;
  NetPreset p;
  p.name = std::string(name);
  if (name == "off") return p;
  if (name == "a") {
    // P0 and P1 on opposite coasts, helper in between.
    p.p0_p1 = {microseconds(63000), 330e6};
    p.p0_helper = {microseconds(32000), 700e6};
    p.p1_helper = {microseconds(32000), 700e6};
  } else if (name == "b") {
    p.p0_p1 = {microseconds(63000), 100e6};
    p.p0_helper = {microseconds(32000), 100e6};
    p.p1_helper = {microseconds(32000), 100e6};
  } else if (name == "c") {
    p.p0_p1 = p.p0_helper = p.p1_helper = {microseconds(100), 25e9};
  } else {
    throw std::invalid_argument("unknown network preset '" + std::string(name) + "' (a, b, c or off)");
  }
  return p;
}

std::shared_ptr<Link> maybe_shape(std::shared_ptr<Link> link, const NetPreset& preset, Role self, Role peer) {
  const LinkShape s = preset.between(self, peer);
  if (!s.active()) return link;
  return std::make_shared<ShapedLink>(std::move(link), s);
}

// ---------------------------------------------------------------- sockets

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
    throw std::invalid_argument("endpoint '" + std::string(text) + "' is not host:port");
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  unsigned port = 0;
  auto digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || port > 65535)
    throw std::invalid_argument("endpoint '" + std::string(text) + "' has a bad port");
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

namespace {

addrinfo* resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw std::runtime_error("cannot resolve " + ep.to_string() + ": " + gai_strerror(rc));
  return res;
}

}  // namespace

int listen_tcp(const Endpoint& ep, int backlog) {
  addrinfo* res = resolve(ep, true);
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  }
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, backlog) != 0) {
    const int err = errno;
    ::freeaddrinfo(res);
    ::close(fd);
    throw std::runtime_error("cannot listen on " + ep.to_string() + ": " + std::strerror(err));
  }
  ::freeaddrinfo(res);
  return fd;
}

int accept_tcp(int listen_fd) {
  for (;;) {
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd >= 0) return fd;
    if (errno == EINTR || errno == ECONNABORTED) continue;
    throw LinkClosed(std::string("accept: ") + std::strerror(errno));
  }
}

int dial_tcp(const Endpoint& ep, std::chrono::milliseconds give_up_after) {
  const auto deadline = Clock::now() + give_up_after;
  std::string last_error = "no attempt";
  for (;;) {
    addrinfo* res = resolve(ep, false);
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return fd;
    }
    last_error = std::strerror(errno);
    if (fd >= 0) ::close(fd);
    ::freeaddrinfo(res);
    if (Clock::now() >= deadline) throw LinkClosed("cannot connect to " + ep.to_string() + ": " + last_error);
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

void close_fd(int fd) {
  if (fd >= 0) ::close(fd);
}

}  // namespace pprl::net
