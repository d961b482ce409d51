#pragma once

#include <span>
#include <vector>

#include "pprl/mpc/session.hpp"
#include "pprl/ring.hpp"

// Helper-assisted two-party primitives over additive shares in Z_2^64.
//
// Every primitive comes as a pair: the proxy side in pprl::mpc, called by P0
// and P1 with their shares, and the helper side in pprl::mpc::helper, called
// with only the batch shape. The three calls must be made at the same point of
// each party's program; the pairwise streams stay aligned because all three
// parties draw from them in the same order.
//
// Correlated randomness: P0's part of every triple is drawn from the
// P0<->helper stream, so the helper never sends anything to P0. P1 draws its
// a/b parts from the P1<->helper stream and receives only the c corrections.

namespace pprl::mpc {

/// XOR-shared 64-bit words; bit i of the secret is bit i of w0 ^ w1.
struct BitShareVector {
  Party party = Party::P0;
  std::vector<u64> words;

  std::size_t size() const { return words.size(); }
};

/// Element-wise product, one round.
ShareVector multiply(Session& s, const ShareVector& x, const ShareVector& y);

/// AND of 0/1 values is their product.
inline ShareVector and_bits(Session& s, const ShareVector& x, const ShareVector& y) { return multiply(s, x, y); }

/// For every row r and segment k: sum over the segment's columns of
/// query[c] * rows[r][c]. The query is masked once for all rows. One round.
ShareVector dot_products(Session& s, std::span<const u64> query, std::span<const std::span<const u64>> rows,
                         std::span<const std::size_t> segments);

/// Bitwise AND of XOR-shared words, one round.
BitShareVector and_words(Session& s, const BitShareVector& x, const BitShareVector& y);

/// Opens z + r to the helper (r is a mask both proxies know) and receives
/// XOR shares of the opened value's bits back.
struct MaskedBits {
  BitShareVector bits;     // XOR shares of m = z + r
  std::vector<u64> mask;   // r, public to both proxies
};
MaskedBits open_to_helper(Session& s, const ShareVector& z);

/// Arithmetic shares of bit 0 of each XOR-shared word, one round.
ShareVector bit_to_arithmetic(Session& s, const BitShareVector& bits);

/// Sign bit (bit 63) of z. Sound as a comparison only when |z| < 2^61.
ShareVector secure_msb(Session& s, const ShareVector& z);

/// 1 iff a >= b, for a, b in [0, 2^61).
ShareVector compare_geq(Session& s, const ShareVector& a, const ShareVector& b);

/// 1 iff a == b, any ring values.
ShareVector equals(Session& s, const ShareVector& a, const ShareVector& b);

/// c ? x : y for c in {0, 1}.
ShareVector multiplex(Session& s, const ShareVector& x, const ShareVector& y, const ShareVector& c);

// Number of proxy<->proxy rounds of the comparison-type primitives.
inline constexpr unsigned kCarryLevels = 6;
inline constexpr unsigned kCompareRounds = kCarryLevels + 1;

namespace helper {

void multiply(Session& s, std::size_t n);
inline void and_bits(Session& s, std::size_t n) { multiply(s, n); }
void dot_products(Session& s, std::size_t rows, std::span<const std::size_t> segments);
void and_words(Session& s, std::size_t n);
void open_to_helper(Session& s, std::size_t n);
void bit_to_arithmetic(Session& s, std::size_t n);
void secure_msb(Session& s, std::size_t n);
void compare_geq(Session& s, std::size_t n);
void equals(Session& s, std::size_t n);
void multiplex(Session& s, std::size_t n);

}  // namespace helper

}  // namespace pprl::mpc
