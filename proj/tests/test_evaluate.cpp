#include <gtest/gtest.h>

#include <random>

#include "pprl/config.hpp"
#include "pprl/evaluate.hpp"
#include "pprl/synth.hpp"

using namespace pprl;
using namespace pprl::eval;

namespace {

// Probability that a random positive outscores a random negative, ties
// counting one half, by direct enumeration of all pairs.
double pairwise_auc(const std::vector<double>& s, const std::vector<bool>& pos) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!pos[i] || pos[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  return wins / pairs;
}

}  // namespace

TEST(Evaluate, PerfectScores) {
  const std::vector<QueryBest> r = {{0, {1, 1}}, {1, {1, 1}}, {0, {1, 5}}};
  const std::vector<std::optional<std::size_t>> cp = {0, 1, std::nullopt};
  const auto row = errors_at(r, cp, 0.75);
  EXPECT_EQ(row.fp, 0u);
  EXPECT_EQ(row.fn, 0u);
}

TEST(Evaluate, AllZeroScores) {
  const std::vector<QueryBest> r = {{0, {0, 1}}, {0, {0, 1}}, {0, {0, 1}}};
  const std::vector<std::optional<std::size_t>> cp = {0, std::nullopt, 2};
  const auto row = errors_at(r, cp, 0.5);
  EXPECT_EQ(row.fp, 0u);
  EXPECT_EQ(row.fn, 2u);
}

TEST(Evaluate, WrongIndexCountsBoth) {
  const std::vector<QueryBest> r = {{3, {9, 10}}};
  const std::vector<std::optional<std::size_t>> cp = {4};
  const auto row = errors_at(r, cp, 0.5);
  EXPECT_EQ(row.fp, 1u);
  EXPECT_EQ(row.fn, 1u);
}

TEST(Evaluate, StrictThreshold) {
  const std::vector<QueryBest> r = {{0, {3, 4}}};
  const std::vector<std::optional<std::size_t>> cp = {std::nullopt};
  EXPECT_EQ(errors_at(r, cp, 0.75).fp, 0u);
  EXPECT_EQ(errors_at(r, cp, 0.74).fp, 1u);
}

TEST(Evaluate, AucMatchesPairwiseDefinition) {
  std::mt19937_64 g(8);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s(2 + g() % 60);
    std::vector<bool> pos(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = static_cast<double>(g() % 7) / 7.0;  // plenty of ties
      pos[i] = g() % 2;
    }
    pos[0] = true;
    pos[1] = false;
    EXPECT_NEAR(roc_auc(s, pos), pairwise_auc(s, pos), 1e-12);
  }
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.1, 0.9}, {false, true}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.5, 0.5}, {false, true}), 0.5);
  EXPECT_THROW(roc_auc(std::vector<double>{0.5}, {true}), std::invalid_argument);
}

TEST(Evaluate, MonotoneInThreshold) {
  synth::SyntheticDatasetSpec spec;
  spec.records = 300;
  spec.seed = 31;
  const auto d = synth::synthesize(spec);
  std::vector<EncodedRecord> a, b;
  for (const auto& r : d.a) a.push_back(encode_record(r));
  for (const auto& r : d.b) b.push_back(encode_record(r));
  const auto best = best_matches(a, b, default_linkage_config());
  const auto cp = counterparts(a.size(), d.truth);
  std::vector<double> taus;
  for (int i = 0; i < 50; ++i) taus.push_back(0.5 + i / 100.0);
  const auto rep = evaluate(best, cp, taus);
  EXPECT_EQ(rep.with_counterpart, d.truth.size());
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    EXPECT_LE(rep.rows[i].fp, rep.rows[i - 1].fp);
    EXPECT_GE(rep.rows[i].fn, rep.rows[i - 1].fn);
  }
  EXPECT_GE(rep.auc, 0.0);
  EXPECT_LE(rep.auc, 1.0);
  for (const auto& r : rep.rows) EXPECT_GE(r.total(), rep.best.total());
}

TEST(Evaluate, SecureEngineAgreesWithPlain) {
  synth::SyntheticDatasetSpec spec;
  spec.records = 40;
  spec.seed = 32;
  const auto d = synth::synthesize(spec);
  std::vector<EncodedRecord> a, b;
  for (const auto& r : d.a) a.push_back(encode_record(r));
  for (const auto& r : d.b) b.push_back(encode_record(r));
  const auto cfg = default_linkage_config();
  const auto plain = best_matches(std::span(a).first(10), b, cfg);
  const auto secure = secure_best_matches(std::span(a).first(10), b, cfg);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    if (plain[i].score.n * kThresholdScale <= plain[i].score.d) {
      EXPECT_EQ(secure[i].score.n, 0u);
      continue;
    }
    EXPECT_EQ(secure[i].index, plain[i].index);
    EXPECT_EQ(secure[i].score, plain[i].score);
  }
}

TEST(Evaluate, Counterparts) {
  const std::vector<std::pair<std::size_t, std::size_t>> t = {{0, 3}, {2, 1}};
  const auto cp = counterparts(3, t);
  EXPECT_EQ(cp[0], 3u);
  EXPECT_FALSE(cp[1]);
  EXPECT_EQ(cp[2], 1u);
  const std::vector<std::pair<std::size_t, std::size_t>> dup = {{0, 3}, {0, 1}};
  EXPECT_THROW(counterparts(3, dup), std::invalid_argument);
  EXPECT_THROW(counterparts(1, t), std::invalid_argument);
}
