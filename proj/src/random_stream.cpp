#include "pprl/random_stream.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

namespace pprl {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialise");
  });
}

RandomStream::RandomStream(const Seed128& seed) {
  ensure_sodium();
  static constexpr char kDomain[] = "pprl/stream/v1";
  crypto_generichash(key_.data(), key_.size(), seed.data(), seed.size(),
                     reinterpret_cast<const unsigned char*>(kDomain), sizeof(kDomain) - 1);
}

void RandomStream::fill(std::span<u64> out) {
  if (out.empty()) return;
  if (counter_ > ~u64{0} - out.size()) throw StreamExhausted("random stream counter would wrap");
  // 8 words per 64-byte ChaCha block; word k lives in block k / 8.
  const u64 first_block = counter_ / 8;
  const std::size_t skip = counter_ % 8;
  const std::size_t blocks = (skip + out.size() + 7) / 8;
  std::vector<std::uint8_t> buf(blocks * 64, 0);
  static constexpr std::uint8_t kNonce[crypto_stream_chacha20_NONCEBYTES] = {};
  crypto_stream_chacha20_xor_ic(buf.data(), buf.data(), buf.size(), kNonce, first_block,
                                key_.data());
  const std::uint8_t* src = buf.data() + skip * 8;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = load_le64(src + 8 * i);
  counter_ += out.size();
}

std::vector<u64> RandomStream::next(std::size_t n) {
  std::vector<u64> out(n);
  fill(out);
  return out;
}

u64 RandomStream::next_word() {
  u64 w = 0;
  fill(std::span<u64>(&w, 1));
  return w;
}

Seed128 derive_session_seed(const Seed128& master, StreamPair pair, const SessionId& session) {
  ensure_sodium();
  std::array<std::uint8_t, 1 + 16> msg{};
  msg[0] = static_cast<std::uint8_t>(pair);
  std::memcpy(msg.data() + 1, session.data(), session.size());
  Seed128 out{};
  crypto_generichash(out.data(), out.size(), msg.data(), msg.size(), master.data(), master.size());
  return out;
}

Seed128 derive_pair_seed(const Seed128& master, StreamPair pair) {
  ensure_sodium();
  const std::array<std::uint8_t, 2> msg{0xA5, static_cast<std::uint8_t>(pair)};
  Seed128 out{};
  crypto_generichash(out.data(), out.size(), msg.data(), msg.size(), master.data(), master.size());
  return out;
}

Seed128 random_seed() {
  ensure_sodium();
  Seed128 s{};
  randombytes_buf(s.data(), s.size());
  return s;
}

SessionId random_session_id() {
  ensure_sodium();
  SessionId s{};
  randombytes_buf(s.data(), s.size());
  return s;
}

Seed128 parse_seed_hex(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.empty() || hex.size() > 32)
    throw std::invalid_argument("seed must be 1 to 32 hex digits");
  // Short seeds are left-padded with zeros.
  std::string padded(32 - hex.size(), '0');
  padded.append(hex);
  Seed128 out{};
  for (std::size_t i = 0; i < 16; ++i) {
    auto nibble = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw std::invalid_argument("seed contains a non-hex character");
    };
    out[i] = static_cast<std::uint8_t>(nibble(padded[2 * i]) << 4 | nibble(padded[2 * i + 1]));
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

}  // namespace pprl
