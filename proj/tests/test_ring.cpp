#include <gtest/gtest.h>

#include <random>
#include <set>

#include "pprl/random_stream.hpp"
#include "pprl/ring.hpp"

using namespace pprl;

namespace {

// Stream that yields a fixed mask so the share values are predictable.
Seed128 seed_of(std::uint8_t b) {
  Seed128 s{};
  s.fill(b);
  return s;
}

}  // namespace

TEST(Ring, ShareOfZeroSumsToZero) {
  RandomStream rng(seed_of(1));
  RandomStream copy(seed_of(1));
  const u64 r = copy.next_word();
  const auto [s0, s1] = share_value(0, rng);
  EXPECT_EQ(s0.value, r);
  EXPECT_EQ(s1.value, u64(0) - r);
  EXPECT_EQ(reconstruct(s0, s1), 0u);
}

TEST(Ring, ReconstructExamples) {
  EXPECT_EQ(reconstruct(Share{Party::P0, 5}, Share{Party::P1, ~u64{0} - 4}), 0u);
  EXPECT_EQ(reconstruct(Share{Party::P0, 7}, Share{Party::P1, 35}), 42u);
}

TEST(Ring, ShareRoundTripRandom) {
  RandomStream rng(random_seed());
  std::mt19937_64 gen(11);
  for (int i = 0; i < 100000; ++i) {
    const u64 v = gen();
    const auto [s0, s1] = share_value(v, rng);
    ASSERT_EQ(reconstruct(s0, s1), v);
  }
  std::vector<u64> vs(1000);
  for (auto& v : vs) v = gen();
  const auto [a, b] = share_vector(vs, rng);
  EXPECT_EQ(reconstruct(a, b), vs);
}

TEST(Ring, LocalLinear) {
  RandomStream rng(random_seed());
  auto lin = [&](std::vector<u64> secrets, std::vector<u64> coeffs, u64 offset) {
    std::vector<Share> p0, p1;
    for (u64 s : secrets) {
      const auto [a, b] = share_value(s, rng);
      p0.push_back(a);
      p1.push_back(b);
    }
    return reconstruct(local_linear(p0, coeffs, offset, Party::P0), local_linear(p1, coeffs, offset, Party::P1));
  };
  EXPECT_EQ(lin({123456789}, {1}, 0), 123456789u);
  EXPECT_EQ(lin({6}, {2}, 0), 12u);
  EXPECT_EQ(lin({3, 4}, {2, 10}, 1), 47u);
  EXPECT_EQ(lin({u64{1} << 63}, {2}, 0), 0u);
}

TEST(Ring, LocalScaleAdd) {
  RandomStream rng(random_seed());
  const std::vector<u64> x = {1, 2, 3};
  const auto [a, b] = share_vector(x, rng);
  const std::vector<u64> coeffs = {5, 6, 7}, offsets = {100, 0, ~u64{0}};
  const auto out = reconstruct(local_scale_add(a, coeffs, offsets), local_scale_add(b, coeffs, offsets));
  EXPECT_EQ(out, (std::vector<u64>{105, 12, 20}));
}

TEST(Ring, Le64Encoding) {
  std::vector<std::uint8_t> buf;
  append_le64(buf, 0x0102030405060708ull);
  EXPECT_EQ(buf, (std::vector<std::uint8_t>{8, 7, 6, 5, 4, 3, 2, 1}));
  EXPECT_EQ(load_le64(buf.data()), 0x0102030405060708ull);
  const std::vector<u64> words = {0, ~u64{0}, 42};
  EXPECT_EQ(from_bytes(to_bytes(words)), words);
  const std::vector<std::uint8_t> ragged(7);
  EXPECT_THROW(from_bytes(ragged), StructuralError);
}

TEST(Stream, SameSeedSameSequence) {
  const Seed128 s = random_seed();
  RandomStream a(s), b(s);
  EXPECT_EQ(a.next(1000), b.next(1000));
}

TEST(Stream, DistinctSeedsDiffer) {
  RandomStream a(seed_of(1)), b(seed_of(2));
  const auto x = a.next(16), y = b.next(16);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NE(x[i], y[i]);
}

TEST(Stream, CounterAdvances) {
  RandomStream a(seed_of(3));
  const auto first = a.next(3);
  const auto second = a.next(3);
  EXPECT_EQ(a.counter(), 6u);
  std::set<u64> all(first.begin(), first.end());
  all.insert(second.begin(), second.end());
  EXPECT_EQ(all.size(), 6u);
  // Position k depends only on (seed, k), not on how reads were split.
  RandomStream b(seed_of(3));
  std::vector<u64> joined = b.next(6);
  EXPECT_TRUE(std::equal(first.begin(), first.end(), joined.begin()));
  EXPECT_TRUE(std::equal(second.begin(), second.end(), joined.begin() + 3));
}

TEST(Stream, SessionSeedsAreSeparated) {
  const Seed128 m = random_seed();
  const SessionId s1 = random_session_id(), s2 = random_session_id();
  EXPECT_NE(derive_session_seed(m, StreamPair::P0P1, s1), derive_session_seed(m, StreamPair::P0P1, s2));
  EXPECT_NE(derive_session_seed(m, StreamPair::P0P1, s1), derive_session_seed(m, StreamPair::P0Helper, s1));
  EXPECT_EQ(derive_session_seed(m, StreamPair::P1Helper, s1), derive_session_seed(m, StreamPair::P1Helper, s1));
}

TEST(Stream, SeedHex) {
  const Seed128 s = parse_seed_hex("000102030405060708090a0b0c0d0e0f");
  for (int i = 0; i < 16; ++i) EXPECT_EQ(s[i], i);
  EXPECT_EQ(to_hex(s), "000102030405060708090a0b0c0d0e0f");
  EXPECT_EQ(parse_seed_hex("ff")[15], 0xff);
  EXPECT_EQ(parse_seed_hex("ff")[0], 0);
  EXPECT_THROW(parse_seed_hex(""), std::invalid_argument);
  EXPECT_THROW(parse_seed_hex(std::string(33, '1')), std::invalid_argument);
  EXPECT_THROW(parse_seed_hex("zz0102030405060708090a0b0c0d0e0f"), std::invalid_argument);
}
