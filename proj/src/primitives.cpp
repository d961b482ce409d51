#include "pprl/mpc/primitives.hpp"

#include <numeric>

namespace pprl::mpc {

using net::MessageType;

namespace {

void require_same_size(const char* op, std::size_t a, std::size_t b) {
  if (a != b)
    throw StructuralError(std::string(op) + ": operand lengths differ (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
}

void require_party(const char* op, Session& s, Party p) {
  if (s.party() != p) throw StructuralError(std::string(op) + ": share belongs to the other proxy");
}

// Triple parts a, b for this proxy plus c (P0 from its stream, P1 from the
// helper's correction block).
struct ArithTriples {
  std::vector<u64> a, b, c;
};

ArithTriples draw_arith(Session& s, std::size_t n) {
  ArithTriples t;
  RandomStream& rs = s.stream_with(Role::Helper);
  t.a = rs.next(n);
  t.b = rs.next(n);
  if (s.party() == Party::P0) t.c = rs.next(n);
  s.meter().triples += n;
  return t;
}

}  // namespace

ShareVector multiply(Session& s, const ShareVector& x, const ShareVector& y) {
  require_same_size("multiply", x.size(), y.size());
  require_party("multiply", s, x.party);
  require_party("multiply", s, y.party);
  const std::size_t n = x.size();
  ArithTriples t = draw_arith(s, n);

  std::vector<u64> mine(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    mine[i] = x.values[i] - t.a[i];
    mine[n + i] = y.values[i] - t.b[i];
  }
  s.send(s.peer(), MessageType::Open, mine);
  s.meter().peer_rounds += 1;
  if (s.party() == Party::P1) t.c = s.recv(Role::Helper, MessageType::TripleBlock, n);
  const auto theirs = s.recv(s.peer(), MessageType::Open, 2 * n);

  const bool lead = s.party() == Party::P0;
  ShareVector z(x.party, n);
  for (std::size_t i = 0; i < n; ++i) {
    const u64 e = mine[i] + theirs[i];
    const u64 f = mine[n + i] + theirs[n + i];
    z.values[i] = t.c[i] + e * t.b[i] + f * t.a[i] + (lead ? e * f : 0);
  }
  return z;
}

ShareVector dot_products(Session& s, std::span<const u64> query, std::span<const std::span<const u64>> rows,
                         std::span<const std::size_t> segments) {
  const std::size_t width = std::accumulate(segments.begin(), segments.end(), std::size_t{0});
  require_same_size("dot_products", query.size(), width);
  for (const auto& r : rows) require_same_size("dot_products", r.size(), width);
  const std::size_t m = rows.size();
  const std::size_t k = segments.size();

  RandomStream& rs = s.stream_with(Role::Helper);
  const auto a = rs.next(width);
  const auto b = rs.next(m * width);
  std::vector<u64> c;
  if (s.party() == Party::P0) c = rs.next(m * k);
  s.meter().dot_triples += m * k;

  std::vector<u64> mine(width + m * width);
  for (std::size_t i = 0; i < width; ++i) mine[i] = query[i] - a[i];
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t i = 0; i < width; ++i) mine[width + r * width + i] = rows[r][i] - b[r * width + i];
  s.send(s.peer(), MessageType::Open, mine);
  s.meter().peer_rounds += 1;
  if (s.party() == Party::P1) c = s.recv(Role::Helper, MessageType::TripleBlock, m * k);
  const auto theirs = s.recv(s.peer(), MessageType::Open, mine.size());

  const bool lead = s.party() == Party::P0;
  std::vector<u64> e(width);
  for (std::size_t i = 0; i < width; ++i) e[i] = mine[i] + theirs[i];

  ShareVector z(s.party(), m * k);
  for (std::size_t r = 0; r < m; ++r) {
    const u64* br = b.data() + r * width;
    const u64* fm = mine.data() + width + r * width;
    const u64* ft = theirs.data() + width + r * width;
    std::size_t col = 0;
    for (std::size_t seg = 0; seg < k; ++seg) {
      u64 acc = c[r * k + seg];
      for (std::size_t end = col + segments[seg]; col < end; ++col) {
        const u64 f = fm[col] + ft[col];
        acc += e[col] * br[col] + a[col] * f + (lead ? e[col] * f : 0);
      }
      z.values[r * k + seg] = acc;
    }
  }
  return z;
}

BitShareVector and_words(Session& s, const BitShareVector& x, const BitShareVector& y) {
  require_same_size("and_words", x.size(), y.size());
  require_party("and_words", s, x.party);
  const std::size_t n = x.size();
  RandomStream& rs = s.stream_with(Role::Helper);
  const auto a = rs.next(n);
  const auto b = rs.next(n);
  std::vector<u64> c;
  if (s.party() == Party::P0) c = rs.next(n);
  s.meter().bool_triples += n;

  std::vector<u64> mine(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    mine[i] = x.words[i] ^ a[i];
    mine[n + i] = y.words[i] ^ b[i];
  }
  s.send(s.peer(), MessageType::Open, mine);
  s.meter().peer_rounds += 1;
  if (s.party() == Party::P1) c = s.recv(Role::Helper, MessageType::BoolTripleBlock, n);
  const auto theirs = s.recv(s.peer(), MessageType::Open, 2 * n);

  const bool lead = s.party() == Party::P0;
  BitShareVector z{x.party, std::vector<u64>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const u64 e = mine[i] ^ theirs[i];
    const u64 f = mine[n + i] ^ theirs[n + i];
    z.words[i] = c[i] ^ (e & b[i]) ^ (f & a[i]) ^ (lead ? e & f : 0);
  }
  return z;
}

MaskedBits open_to_helper(Session& s, const ShareVector& z) {
  require_party("open_to_helper", s, z.party);
  const std::size_t n = z.size();
  // Both proxies derive the same two mask vectors; each masks its own share
  // with one of them, so every word the helper sees is uniformly random.
  const auto rho = s.stream_with(s.peer()).next(2 * n);
  const std::size_t own = s.party() == Party::P0 ? 0 : n;
  std::vector<u64> masked(n);
  MaskedBits out{{z.party, {}}, std::vector<u64>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    masked[i] = z.values[i] + rho[own + i];
    out.mask[i] = rho[i] + rho[n + i];
  }
  s.send(Role::Helper, MessageType::Open, masked);
  s.meter().helper_rounds += 1;
  if (s.party() == Party::P0)
    out.bits.words = s.stream_with(Role::Helper).next(n);
  else
    out.bits.words = s.recv(Role::Helper, MessageType::BoolTripleBlock, n);
  return out;
}

ShareVector bit_to_arithmetic(Session& s, const BitShareVector& bits) {
  require_party("bit_to_arithmetic", s, bits.party);
  const std::size_t n = bits.size();
  // c0 XOR c1 = c0 + c1 - 2 c0 c1; the product takes one multiplication with
  // P0 contributing only to x and P1 only to y.
  ShareVector own(bits.party, n), x(bits.party, n), y(bits.party, n);
  for (std::size_t i = 0; i < n; ++i) {
    own.values[i] = bits.words[i] & 1;
    (bits.party == Party::P0 ? x : y).values[i] = own.values[i];
  }
  const ShareVector prod = multiply(s, x, y);
  for (std::size_t i = 0; i < n; ++i) own.values[i] -= 2 * prod.values[i];
  return own;
}

namespace {

// bit 63 of (m - r) where m is XOR-shared and r is public, via m + ~r + 1 and
// a Kogge-Stone carry network over bits 0..62. Result in bit 0.
BitShareVector sign_of_difference(Session& s, const MaskedBits& mb) {
  const std::size_t n = mb.bits.size();
  const bool lead = mb.bits.party == Party::P0;
  BitShareVector g{mb.bits.party, std::vector<u64>(n)}, p{mb.bits.party, std::vector<u64>(n)};
  std::vector<u64> p_top(n);
  for (std::size_t i = 0; i < n; ++i) {
    const u64 m = mb.bits.words[i];
    const u64 addend = ~mb.mask[i];
    p.words[i] = lead ? m ^ addend : m;
    g.words[i] = m & addend;
    // Fold the carry-in of 1 into position 0: generate there is m0 | addend0.
    if (addend & 1)
      g.words[i] = (g.words[i] & ~u64{1}) | (lead ? 1 : 0);
    else
      g.words[i] = (g.words[i] & ~u64{1}) | (m & 1);
    p_top[i] = p.words[i] >> 63;
  }
  // Position 0's (g, p) pair is never used as the upper half of a merge, so
  // g and p are disjoint wherever the XOR form of g | (p & g') is applied.
  for (unsigned level = 0; level < kCarryLevels; ++level) {
    const unsigned shift = 1u << level;
    const bool last = level + 1 == kCarryLevels;
    BitShareVector lhs{p.party, {}}, rhs{p.party, {}};
    lhs.words.reserve(2 * n);
    rhs.words.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      lhs.words.push_back(p.words[i]);
      rhs.words.push_back(g.words[i] << shift);
    }
    if (!last) {
      for (std::size_t i = 0; i < n; ++i) {
        lhs.words.push_back(p.words[i]);
        rhs.words.push_back(p.words[i] << shift);
      }
    }
    const BitShareVector prod = and_words(s, lhs, rhs);
    for (std::size_t i = 0; i < n; ++i) {
      g.words[i] ^= prod.words[i];
      if (!last) p.words[i] = prod.words[n + i];
    }
  }
  BitShareVector out{p.party, std::vector<u64>(n)};
  for (std::size_t i = 0; i < n; ++i) out.words[i] = (p_top[i] ^ (g.words[i] >> 62)) & 1;
  return out;
}

}  // namespace

ShareVector secure_msb(Session& s, const ShareVector& z) {
  const MaskedBits mb = open_to_helper(s, z);
  return bit_to_arithmetic(s, sign_of_difference(s, mb));
}

ShareVector compare_geq(Session& s, const ShareVector& a, const ShareVector& b) {
  require_same_size("compare_geq", a.size(), b.size());
  ShareVector diff(a.party, a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff.values[i] = a.values[i] - b.values[i];
  ShareVector bit = secure_msb(s, diff);
  const bool lead = a.party == Party::P0;
  for (auto& v : bit.values) v = (lead ? 1 : 0) - v;
  return bit;
}

ShareVector equals(Session& s, const ShareVector& a, const ShareVector& b) {
  require_same_size("equals", a.size(), b.size());
  const std::size_t n = a.size();
  ShareVector diff(a.party, n);
  for (std::size_t i = 0; i < n; ++i) diff.values[i] = a.values[i] - b.values[i];
  const MaskedBits mb = open_to_helper(s, diff);
  // z == 0 iff m == r iff every bit of m XOR ~r is set; fold with an AND tree.
  const bool lead = a.party == Party::P0;
  BitShareVector v{a.party, std::vector<u64>(n)};
  for (std::size_t i = 0; i < n; ++i) v.words[i] = lead ? mb.bits.words[i] ^ ~mb.mask[i] : mb.bits.words[i];
  for (unsigned level = 0; level < kCarryLevels; ++level) {
    const unsigned shift = 32u >> level;
    BitShareVector shifted{v.party, std::vector<u64>(n)};
    for (std::size_t i = 0; i < n; ++i) shifted.words[i] = v.words[i] >> shift;
    v = and_words(s, v, shifted);
  }
  return bit_to_arithmetic(s, v);
}

ShareVector multiplex(Session& s, const ShareVector& x, const ShareVector& y, const ShareVector& c) {
  require_same_size("multiplex", x.size(), y.size());
  require_same_size("multiplex", x.size(), c.size());
  ShareVector diff(x.party, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff.values[i] = x.values[i] - y.values[i];
  ShareVector out = multiply(s, c, diff);
  for (std::size_t i = 0; i < x.size(); ++i) out.values[i] += y.values[i];
  return out;
}

// ---------------------------------------------------------------- helper side

namespace helper {

void multiply(Session& s, std::size_t n) {
  RandomStream& to_p0 = s.stream_with(Role::P0);
  RandomStream& to_p1 = s.stream_with(Role::P1);
  const auto a0 = to_p0.next(n), b0 = to_p0.next(n), c0 = to_p0.next(n);
  const auto a1 = to_p1.next(n), b1 = to_p1.next(n);
  std::vector<u64> c1(n);
  for (std::size_t i = 0; i < n; ++i) c1[i] = (a0[i] + a1[i]) * (b0[i] + b1[i]) - c0[i];
  s.meter().triples += n;
  s.send(Role::P1, MessageType::TripleBlock, c1);
}

void dot_products(Session& s, std::size_t rows, std::span<const std::size_t> segments) {
  const std::size_t width = std::accumulate(segments.begin(), segments.end(), std::size_t{0});
  const std::size_t k = segments.size();
  RandomStream& to_p0 = s.stream_with(Role::P0);
  RandomStream& to_p1 = s.stream_with(Role::P1);
  const auto a0 = to_p0.next(width);
  const auto b0 = to_p0.next(rows * width);
  const auto c0 = to_p0.next(rows * k);
  const auto a1 = to_p1.next(width);
  const auto b1 = to_p1.next(rows * width);

  std::vector<u64> a(width);
  for (std::size_t i = 0; i < width; ++i) a[i] = a0[i] + a1[i];
  std::vector<u64> c1(rows * k);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t col = 0;
    for (std::size_t seg = 0; seg < k; ++seg) {
      u64 acc = 0;
      for (std::size_t end = col + segments[seg]; col < end; ++col)
        acc += a[col] * (b0[r * width + col] + b1[r * width + col]);
      c1[r * k + seg] = acc - c0[r * k + seg];
    }
  }
  s.meter().dot_triples += rows * k;
  s.send(Role::P1, MessageType::TripleBlock, c1);
}

void and_words(Session& s, std::size_t n) {
  RandomStream& to_p0 = s.stream_with(Role::P0);
  RandomStream& to_p1 = s.stream_with(Role::P1);
  const auto a0 = to_p0.next(n), b0 = to_p0.next(n), c0 = to_p0.next(n);
  const auto a1 = to_p1.next(n), b1 = to_p1.next(n);
  std::vector<u64> c1(n);
  for (std::size_t i = 0; i < n; ++i) c1[i] = ((a0[i] ^ a1[i]) & (b0[i] ^ b1[i])) ^ c0[i];
  s.meter().bool_triples += n;
  s.send(Role::P1, MessageType::BoolTripleBlock, c1);
}

void open_to_helper(Session& s, std::size_t n) {
  const auto m0 = s.recv(Role::P0, MessageType::Open, n);
  const auto m1 = s.recv(Role::P1, MessageType::Open, n);
  const auto share0 = s.stream_with(Role::P0).next(n);
  std::vector<u64> share1(n);
  for (std::size_t i = 0; i < n; ++i) share1[i] = (m0[i] + m1[i]) ^ share0[i];
  s.send(Role::P1, MessageType::BoolTripleBlock, share1);
}

void bit_to_arithmetic(Session& s, std::size_t n) { multiply(s, n); }

void secure_msb(Session& s, std::size_t n) {
  open_to_helper(s, n);
  for (unsigned level = 0; level < kCarryLevels; ++level)
    and_words(s, level + 1 == kCarryLevels ? n : 2 * n);
  bit_to_arithmetic(s, n);
}

void compare_geq(Session& s, std::size_t n) { secure_msb(s, n); }

void equals(Session& s, std::size_t n) {
  open_to_helper(s, n);
  for (unsigned level = 0; level < kCarryLevels; ++level) and_words(s, n);
  bit_to_arithmetic(s, n);
}

void multiplex(Session& s, std::size_t n) { multiply(s, n); }

}  // namespace helper

}  // namespace pprl::mpc
