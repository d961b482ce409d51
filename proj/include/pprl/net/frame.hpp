#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pprl/random_stream.hpp"
#include "pprl/role.hpp"

namespace pprl::net {

// Wire layout, all integers little-endian:
//   u32 payload length | u8 type | 16-byte session id | payload
inline constexpr std::size_t kFrameHeaderSize = 4 + 1 + 16;
inline constexpr std::size_t kDefaultMaxPayload = std::size_t{1} << 30;

enum class MessageType : std::uint8_t {
  Hello = 1,
  Config = 2,
  DbShares = 3,
  QueryShares = 4,
  TripleBlock = 5,
  BoolTripleBlock = 6,
  Open = 7,
  Result = 8,
  Abort = 9,
};

const char* to_string(MessageType t);
bool is_known_type(std::uint8_t t);

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Frame {
  MessageType type = MessageType::Abort;
  SessionId session{};
  std::vector<std::uint8_t> payload;

  std::size_t wire_size() const { return kFrameHeaderSize + payload.size(); }
  friend bool operator==(const Frame&, const Frame&) = default;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Decodes exactly one frame; trailing or missing bytes are errors.
Frame decode_frame(std::span<const std::uint8_t> bytes);

/// Incremental decoder for a byte stream.
class FrameDecoder {
 public:
  explicit FrameDecoder(std::size_t max_payload = kDefaultMaxPayload) : max_payload_(max_payload) {}

  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Frame> next();
  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
  std::size_t max_payload_;
};

inline constexpr std::uint32_t kHelloMagic = 0x4C525050;  // "PPRL"
inline constexpr std::uint16_t kProtocolVersion = 1;

using Digest = std::array<std::uint8_t, 32>;

// HELLO: u32 magic | u16 version | u8 role | u8 reserved | 32-byte config digest
struct Hello {
  std::uint16_t version = kProtocolVersion;
  Role role = Role::P0;
  Digest config_digest{};
};

// CONFIG: 32-byte config digest | u64 database size | u64 database epoch
struct SessionConfig {
  Digest config_digest{};
  std::uint64_t db_size = 0;
  std::uint64_t db_epoch = 0;

  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

std::vector<std::uint8_t> encode_hello(const Hello& h);
Hello decode_hello(std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_session_config(const SessionConfig& c);
SessionConfig decode_session_config(std::span<const std::uint8_t> payload);

}  // namespace pprl::net
