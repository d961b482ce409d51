#include "pprl/net/handshake.hpp"

#include <sys/socket.h>
#include <sys/time.h>

#include "pprl/net/transport.hpp"

namespace pprl::net {

namespace {

Frame hello_frame(Role self, const Digest& digest) {
  return Frame{MessageType::Hello, SessionId{}, encode_hello(Hello{kProtocolVersion, self, digest})};
}

// Bounds the blocking reads of the handshake; cleared once it is done.
void set_recv_timeout(int fd, std::chrono::milliseconds t) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(t.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((t.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

constexpr std::chrono::milliseconds kHandshakeTimeout{10000};

void check(const Hello& h, const Digest& digest) {
  if (h.version != kProtocolVersion)
    throw ProtocolError("protocol version mismatch: peer speaks " + std::to_string(h.version) + ", we speak " +
                        std::to_string(kProtocolVersion));
  if (h.config_digest != digest)
    throw ProtocolError(std::string("config digest mismatch with ") + std::string(to_string(h.role)));
}

}  // namespace

Hello hello_dial(int fd, Role self, const Digest& digest, Role expected_peer) {
  TcpLink::write_frame_blocking(fd, hello_frame(self, digest));
  set_recv_timeout(fd, kHandshakeTimeout);
  const Frame reply = TcpLink::read_frame_blocking(fd);
  set_recv_timeout(fd, std::chrono::milliseconds(0));
  if (reply.type == MessageType::Abort)
    throw ProtocolError("handshake refused: " + std::string(reply.payload.begin(), reply.payload.end()));
  if (reply.type != MessageType::Hello)
    throw ProtocolError(std::string("expected HELLO, got ") + to_string(reply.type));
  const Hello h = decode_hello(reply.payload);
  check(h, digest);
  if (h.role != expected_peer)
    throw ProtocolError(std::string("expected ") + std::string(to_string(expected_peer)) + ", reached " +
                        std::string(to_string(h.role)));
  return h;
}

Hello hello_accept(int fd, Role self, const Digest& digest) {
  set_recv_timeout(fd, kHandshakeTimeout);
  const Frame f = TcpLink::read_frame_blocking(fd);
  set_recv_timeout(fd, std::chrono::milliseconds(0));
  try {
    if (f.type != MessageType::Hello) throw ProtocolError(std::string("expected HELLO, got ") + to_string(f.type));
    const Hello h = decode_hello(f.payload);
    check(h, digest);
    TcpLink::write_frame_blocking(fd, hello_frame(self, digest));
    return h;
  } catch (const ProtocolError& e) {
    const std::string_view reason = e.what();
    try {
      TcpLink::write_frame_blocking(
          fd, Frame{MessageType::Abort, SessionId{}, std::vector<std::uint8_t>(reason.begin(), reason.end())});
    } catch (...) {
    }
    throw;
  }
}

}  // namespace pprl::net
