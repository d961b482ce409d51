#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace pprl;
using namespace pprl::mpc;

namespace {

constexpr u64 kB = kComparisonBound;

std::pair<BitShareVector, BitShareVector> xor_share(const std::vector<u64>& v, std::mt19937_64& g) {
  BitShareVector a{Party::P0, {}}, b{Party::P1, {}};
  for (u64 w : v) {
    const u64 r = g();
    a.words.push_back(r);
    b.words.push_back(w ^ r);
  }
  return {a, b};
}

std::vector<u64> xor_open(const BitShareVector& a, const BitShareVector& b) {
  std::vector<u64> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.words[i] ^ b.words[i];
  return out;
}

class Primitives : public ::testing::Test {
 protected:
  LocalCluster cluster{PairSeeds::from_master(random_seed())};
  std::mt19937_64 gen{12345};
};

}  // namespace

TEST_F(Primitives, MultiplyExamples) {
  const auto z = test::run_multiply(cluster, {6, u64{1} << 63, 0, ~u64{0}}, {7, 2, 99, ~u64{0}});
  EXPECT_EQ(z, (std::vector<u64>{42, 0, 0, 1}));
}

TEST_F(Primitives, MultiplyRandom) {
  std::vector<u64> x(10000), y(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = gen();
    y[i] = gen();
  }
  const auto z = test::run_multiply(cluster, x, y);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(z[i], x[i] * y[i]) << i;
}

TEST_F(Primitives, MultiplyTrafficShape) {
  LocalCluster::Meters m;
  test::run_multiply(cluster, {3}, {4}, &m);
  const auto peer = static_cast<std::size_t>(Role::P1), self = static_cast<std::size_t>(Role::P0),
             help = static_cast<std::size_t>(Role::Helper);
  // One OPEN each way between the proxies, nothing else between them.
  EXPECT_EQ(m.p0.open_frames_sent[peer], 1u);
  EXPECT_EQ(m.p1.open_frames_sent[self], 1u);
  EXPECT_EQ(m.p0.frames_sent[peer], 1u);
  EXPECT_EQ(m.p1.frames_sent[self], 1u);
  EXPECT_EQ(m.p0.peer_rounds, 1u);
  // P0's triple shares come from its stream with the helper.
  EXPECT_EQ(m.p0.bytes_received[help], 0u);
  EXPECT_EQ(m.helper.bytes_sent[self], 0u);
  EXPECT_GT(m.p1.bytes_received[help], 0u);
}

TEST_F(Primitives, AndBits) {
  const auto z = test::run_multiply(cluster, {1, 1, 0, 0}, {1, 0, 1, 0});
  EXPECT_EQ(z, (std::vector<u64>{1, 0, 0, 0}));
  std::vector<u64> x(900);
  for (auto& v : x) v = gen() & 1;
  EXPECT_EQ(test::run_multiply(cluster, x, x), x);
}

TEST_F(Primitives, AndWords) {
  std::vector<u64> x(15), y(15);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = gen();
    y[i] = gen();
  }
  auto [x0, x1] = xor_share(x, gen);
  auto [y0, y1] = xor_share(y, gen);
  BitShareVector z0, z1, i0, i1;
  cluster.run(
      [&](Session& s) {
        z0 = and_words(s, x0, y0);
        i0 = and_words(s, x0, x0);
      },
      [&](Session& s) {
        z1 = and_words(s, x1, y1);
        i1 = and_words(s, x1, x1);
      },
      [&](Session& s) {
        helper::and_words(s, x.size());
        helper::and_words(s, x.size());
      });
  const auto z = xor_open(z0, z1);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(z[i], x[i] & y[i]);
  EXPECT_EQ(xor_open(i0, i1), x);
}

TEST_F(Primitives, BitToArithmetic) {
  const std::vector<u64> bits = {0, 1, 0, 1};
  // (w0, w1) = (0,0), (1,0), (1,1), (0,1) with garbage in the upper bits.
  BitShareVector a{Party::P0, {0xf0, 0x1, 0x3, 0x8}}, b{Party::P1, {0x10, 0x6, 0x5, 0x1}};
  ShareVector z0, z1;
  cluster.run([&](Session& s) { z0 = bit_to_arithmetic(s, a); }, [&](Session& s) { z1 = bit_to_arithmetic(s, b); },
              [&](Session& s) { helper::bit_to_arithmetic(s, 4); });
  EXPECT_EQ(reconstruct(z0, z1), bits);
}

TEST_F(Primitives, OpenToHelperMasks) {
  RandomStream rng(random_seed());
  const std::vector<u64> z = {0, 5, ~u64{0}, 123456789};
  auto [z0, z1] = share_vector(z, rng);
  MaskedBits m0, m1;
  cluster.run([&](Session& s) { m0 = open_to_helper(s, z0); }, [&](Session& s) { m1 = open_to_helper(s, z1); },
              [&](Session& s) { helper::open_to_helper(s, z.size()); });
  EXPECT_EQ(m0.mask, m1.mask);
  const auto opened = xor_open(m0.bits, m1.bits);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(opened[i], z[i] + m0.mask[i]);
}

TEST_F(Primitives, MsbExamples) {
  RandomStream rng(random_seed());
  std::vector<u64> z = {5, u64(0) - 5, 0, kB - 1, u64(0) - (kB - 1), u64{1} << 63, ~u64{0} >> 1};
  for (int i = 0; i < 2000; ++i) z.push_back(gen());
  auto [z0, z1] = share_vector(z, rng);
  ShareVector b0, b1;
  const auto m = cluster.run([&](Session& s) { b0 = secure_msb(s, z0); }, [&](Session& s) { b1 = secure_msb(s, z1); },
                             [&](Session& s) { helper::secure_msb(s, z.size()); });
  const auto b = reconstruct(b0, b1);
  for (std::size_t i = 0; i < z.size(); ++i) ASSERT_EQ(b[i], z[i] >> 63) << z[i];
  EXPECT_EQ(m.p0.peer_rounds, kCompareRounds);
  EXPECT_EQ(m.p0.helper_rounds, 1u);
}

TEST_F(Primitives, CompareExamples) {
  const std::vector<u64> x = {5, 3, 9, 0, 0, kB - 1, kB - 1}, y = {3, 5, 9, 0, kB - 1, 0, kB - 1};
  EXPECT_EQ(test::run_compare(cluster, x, y), (std::vector<u64>{1, 0, 1, 1, 0, 1, 1}));
}

TEST_F(Primitives, CompareRandom) {
  std::vector<u64> x(10000), y(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = gen() % kB;
    y[i] = i % 3 == 0 ? x[i] + (gen() % 3) - 1 : gen() % kB;
    if (y[i] >= kB) y[i] = x[i];
  }
  const auto c = test::run_compare(cluster, x, y);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(c[i], x[i] >= y[i] ? 1u : 0u) << x[i] << " " << y[i];
}

TEST_F(Primitives, EqualsExamples) {
  EXPECT_EQ(test::run_equals(cluster, {42, 42, 0, ~u64{0}}, {42, 43, 0, 0}), (std::vector<u64>{1, 0, 1, 0}));
}

TEST_F(Primitives, EqualsNearCollisions) {
  std::vector<u64> x, y;
  for (int i = 0; i < 3000; ++i) {
    const u64 a = gen() & 0xffff;
    for (u64 d : {u64(0), u64(1), ~u64{0}}) {
      x.push_back(a);
      y.push_back(a + d);
    }
    const u64 w = gen();
    x.push_back(w);
    y.push_back(w ^ (u64{1} << (gen() % 64)));
  }
  const auto e = test::run_equals(cluster, x, y);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(e[i], x[i] == y[i] ? 1u : 0u) << i;
}

TEST_F(Primitives, Multiplex) {
  RandomStream rng(random_seed());
  std::vector<u64> x(500), y(500), c(500);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = gen();
    y[i] = gen();
    c[i] = gen() & 1;
  }
  x[0] = 9, y[0] = 4, c[0] = 1;
  x[1] = 9, y[1] = 4, c[1] = 0;
  auto [x0, x1] = share_vector(x, rng);
  auto [y0, y1] = share_vector(y, rng);
  auto [c0, c1] = share_vector(c, rng);
  ShareVector z0, z1;
  cluster.run([&](Session& s) { z0 = multiplex(s, x0, y0, c0); }, [&](Session& s) { z1 = multiplex(s, x1, y1, c1); },
              [&](Session& s) { helper::multiplex(s, x.size()); });
  const auto z = reconstruct(z0, z1);
  EXPECT_EQ(z[0], 9u);
  EXPECT_EQ(z[1], 4u);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(z[i], c[i] ? x[i] : y[i]);
}

TEST_F(Primitives, DotProducts) {
  RandomStream rng(random_seed());
  const std::vector<std::size_t> segments = {5, 0, 11, 4};  // segment lengths
  const std::size_t cols = 20, rows = 7;
  std::vector<u64> q(cols);
  for (auto& v : q) v = gen();
  std::vector<std::vector<u64>> db(rows, std::vector<u64>(cols));
  for (auto& r : db)
    for (auto& v : r) v = gen();
  auto [q0, q1] = share_vector(q, rng);
  std::vector<ShareVector> r0, r1;
  for (const auto& r : db) {
    auto [a, b] = share_vector(r, rng);
    r0.push_back(a);
    r1.push_back(b);
  }
  auto spans = [](const std::vector<ShareVector>& v) {
    std::vector<std::span<const u64>> out;
    for (const auto& s : v) out.emplace_back(s.values);
    return out;
  };
  const auto s0 = spans(r0), s1 = spans(r1);
  ShareVector z0, z1;
  const auto m = cluster.run([&](Session& s) { z0 = dot_products(s, q0.values, s0, segments); },
                             [&](Session& s) { z1 = dot_products(s, q1.values, s1, segments); },
                             [&](Session& s) { helper::dot_products(s, rows, segments); });
  const auto z = reconstruct(z0, z1);
  ASSERT_EQ(z.size(), rows * segments.size());
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t col = 0;
    for (std::size_t k = 0; k < segments.size(); ++k) {
      u64 want = 0;
      for (std::size_t c = 0; c < segments[k]; ++c, ++col) want += q[col] * db[r][col];
      ASSERT_EQ(z[r * segments.size() + k], want) << r << " " << k;
    }
  }
  EXPECT_EQ(m.p0.peer_rounds, 1u);
}

TEST_F(Primitives, MismatchedSizesRejected) {
  RandomStream rng(random_seed());
  auto [a0, a1] = share_vector(std::vector<u64>{1, 2}, rng);
  auto [b0, b1] = share_vector(std::vector<u64>{1}, rng);
  EXPECT_THROW(cluster.run([&](Session& s) { multiply(s, a0, b0); }, [&](Session& s) { multiply(s, a1, b1); },
                           [&](Session& s) { helper::multiply(s, 2); }),
               std::exception);
}
