#include "pprl/net/frame.hpp"

#include <algorithm>
#include <cstring>
#include <string>

namespace pprl {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::P0: return "p0";
    case Role::P1: return "p1";
    case Role::Helper: return "helper";
    case Role::DataOwner: return "owner";
    case Role::QueryClient: return "client";
  }
  return "?";
}

Role parse_role(std::string_view s) {
  for (Role r : {Role::P0, Role::P1, Role::Helper, Role::DataOwner, Role::QueryClient})
    if (to_string(r) == s) return r;
  throw std::invalid_argument("unknown role '" + std::string(s) + "'");
}

}  // namespace pprl

namespace pprl::net {

const char* to_string(MessageType t) {
  switch (t) {
    case MessageType::Hello: return "HELLO";
    case MessageType::Config: return "CONFIG";
    case MessageType::DbShares: return "DB_SHARES";
    case MessageType::QueryShares: return "QUERY_SHARES";
    case MessageType::TripleBlock: return "TRIPLE_BLOCK";
    case MessageType::BoolTripleBlock: return "BOOL_TRIPLE_BLOCK";
    case MessageType::Open: return "OPEN";
    case MessageType::Result: return "RESULT";
    case MessageType::Abort: return "ABORT";
  }
  return "UNKNOWN";
}

bool is_known_type(std::uint8_t t) { return t >= 1 && t <= 9; }

namespace {

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  if (frame.payload.size() > 0xFFFFFFFFu) throw ProtocolError("frame payload exceeds 2^32 - 1 bytes");
  std::vector<std::uint8_t> out(kFrameHeaderSize + frame.payload.size());
  put_u32(out.data(), static_cast<std::uint32_t>(frame.payload.size()));
  out[4] = static_cast<std::uint8_t>(frame.type);
  std::memcpy(out.data() + 5, frame.session.data(), frame.session.size());
  if (!frame.payload.empty())
    std::memcpy(out.data() + kFrameHeaderSize, frame.payload.data(), frame.payload.size());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize)
    throw ProtocolError("truncated frame header (" + std::to_string(bytes.size()) + " bytes)");
  const std::uint32_t len = get_u32(bytes.data());
  if (!is_known_type(bytes[4]))
    throw ProtocolError("unknown message type " + std::to_string(bytes[4]));
  if (bytes.size() - kFrameHeaderSize != len)
    throw ProtocolError("frame length field says " + std::to_string(len) + " payload bytes, got " +
                        std::to_string(bytes.size() - kFrameHeaderSize));
  Frame f;
  f.type = static_cast<MessageType>(bytes[4]);
  std::memcpy(f.session.data(), bytes.data() + 5, f.session.size());
  f.payload.assign(bytes.begin() + kFrameHeaderSize, bytes.end());
  return f;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  if (pos_ > 0 && pos_ >= buf_.size() / 2) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<Frame> FrameDecoder::next() {
  const std::size_t avail = buf_.size() - pos_;
  if (avail < kFrameHeaderSize) return std::nullopt;
  const std::uint8_t* head = buf_.data() + pos_;
  const std::uint32_t len = get_u32(head);
  if (!is_known_type(head[4])) throw ProtocolError("unknown message type " + std::to_string(head[4]));
  if (len > max_payload_)
    throw ProtocolError("frame payload of " + std::to_string(len) + " bytes exceeds the limit");
  if (avail < kFrameHeaderSize + len) return std::nullopt;
  Frame f;
  f.type = static_cast<MessageType>(head[4]);
  std::memcpy(f.session.data(), head + 5, f.session.size());
  f.payload.assign(head + kFrameHeaderSize, head + kFrameHeaderSize + len);
  pos_ += kFrameHeaderSize + len;
  return f;
}

std::vector<std::uint8_t> encode_hello(const Hello& h) {
  std::vector<std::uint8_t> out(40, 0);
  put_u32(out.data(), kHelloMagic);
  out[4] = static_cast<std::uint8_t>(h.version);
  out[5] = static_cast<std::uint8_t>(h.version >> 8);
  out[6] = static_cast<std::uint8_t>(h.role);
  std::copy(h.config_digest.begin(), h.config_digest.end(), out.begin() + 8);
  return out;
}

Hello decode_hello(std::span<const std::uint8_t> payload) {
  if (payload.size() != 40) throw ProtocolError("HELLO payload must be 40 bytes");
  if (get_u32(payload.data()) != kHelloMagic) throw ProtocolError("HELLO magic mismatch");
  Hello h;
  h.version = static_cast<std::uint16_t>(payload[4] | payload[5] << 8);
  if (payload[6] > static_cast<std::uint8_t>(Role::QueryClient)) throw ProtocolError("HELLO carries an unknown role");
  h.role = static_cast<Role>(payload[6]);
  std::copy(payload.begin() + 8, payload.end(), h.config_digest.begin());
  return h;
}

std::vector<std::uint8_t> encode_session_config(const SessionConfig& c) {
  std::vector<std::uint8_t> out(c.config_digest.begin(), c.config_digest.end());
  append_le64(out, c.db_size);
  append_le64(out, c.db_epoch);
  return out;
}

SessionConfig decode_session_config(std::span<const std::uint8_t> payload) {
  if (payload.size() != 48) throw ProtocolError("CONFIG payload must be 48 bytes");
  SessionConfig c;
  std::copy(payload.begin(), payload.begin() + 32, c.config_digest.begin());
  c.db_size = load_le64(payload.data() + 32);
  c.db_epoch = load_le64(payload.data() + 40);
  return c;
}

}  // namespace pprl::net
