#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pprl/ring.hpp"

namespace pprl {

using Seed128 = std::array<std::uint8_t, 16>;
using SessionId = std::array<std::uint8_t, 16>;

// Which two parties share a stream. Values are part of the key derivation.
enum class StreamPair : std::uint8_t { P0P1 = 1, P0Helper = 2, P1Helper = 3 };

class StreamExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keyed counter-mode generator (ChaCha20). Two instances built from the same
/// seed yield the same word sequence; word k of the sequence depends only on
/// (seed, k), so the counter is a plain position.
class RandomStream {
 public:
  explicit RandomStream(const Seed128& seed);

  void fill(std::span<u64> out);
  std::vector<u64> next(std::size_t n);
  u64 next_word();

  u64 counter() const { return counter_; }

 private:
  std::array<std::uint8_t, 32> key_{};
  u64 counter_ = 0;
};

/// Per-session stream seed: BLAKE2b(master || pair || session).
Seed128 derive_session_seed(const Seed128& master, StreamPair pair, const SessionId& session);

/// Derives a pair master seed from one operator-supplied seed.
Seed128 derive_pair_seed(const Seed128& master, StreamPair pair);

Seed128 random_seed();
SessionId random_session_id();

Seed128 parse_seed_hex(std::string_view hex);
std::string to_hex(std::span<const std::uint8_t> bytes);

void ensure_sodium();

}  // namespace pprl
