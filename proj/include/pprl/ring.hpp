#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pprl {

using u64 = std::uint64_t;

// Elements of Z_2^64. Native unsigned arithmetic wraps, which is exactly the
// ring operation; nothing here saturates or checks.
using RingElement = u64;

enum class Party : std::uint8_t { P0 = 0, P1 = 1 };

inline constexpr int index_of(Party p) { return static_cast<int>(p); }
inline constexpr Party other(Party p) { return p == Party::P0 ? Party::P1 : Party::P0; }

class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Share {
  Party party = Party::P0;
  RingElement value = 0;
};

struct ShareVector {
  Party party = Party::P0;
  std::vector<RingElement> values;

  ShareVector() = default;
  ShareVector(Party p, std::vector<RingElement> v) : party(p), values(std::move(v)) {}
  ShareVector(Party p, std::size_t n) : party(p), values(n, 0) {}

  std::size_t size() const { return values.size(); }
  RingElement& operator[](std::size_t i) { return values[i]; }
  RingElement operator[](std::size_t i) const { return values[i]; }
};

class RandomStream;

// s0 = r, s1 = secret - r with r drawn from `stream`.
std::pair<Share, Share> share_value(RingElement secret, RandomStream& stream);
std::pair<ShareVector, ShareVector> share_vector(std::span<const RingElement> secrets,
                                                 RandomStream& stream);

inline RingElement reconstruct(const Share& s0, const Share& s1) { return s0.value + s1.value; }
std::vector<RingElement> reconstruct(const ShareVector& s0, const ShareVector& s1);

// Shares of a public constant: P0 holds the value, P1 holds zero.
inline ShareVector public_shares(Party p, std::span<const RingElement> values) {
  ShareVector out(p, values.size());
  if (p == Party::P0) out.values.assign(values.begin(), values.end());
  return out;
}

// Output shares sum_i coeffs[i] * shares[i] + offset. The offset is added by
// P0 only so that reconstruction sees it once.
Share local_linear(std::span<const Share> shares, std::span<const RingElement> coeffs,
                   RingElement offset, Party party);

// Element-wise form: out[i] = coeff[i] * shares[i] + offset[i].
ShareVector local_scale_add(const ShareVector& shares, std::span<const RingElement> coeffs,
                            std::span<const RingElement> offsets);

// Little-endian 8-byte encoding used on the wire.
void append_le64(std::vector<std::uint8_t>& out, u64 v);
u64 load_le64(const std::uint8_t* p);
std::vector<std::uint8_t> to_bytes(std::span<const u64> words);
std::vector<u64> from_bytes(std::span<const std::uint8_t> bytes);

}  // namespace pprl
