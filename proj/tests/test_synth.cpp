#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pprl/synth.hpp"

using namespace pprl;
using namespace pprl::synth;

namespace {

std::string csv(const std::vector<RawRecord>& rows) {
  std::ostringstream s;
  write_records(s, rows);
  return s.str();
}

std::size_t field_differences(const RawRecord& a, const RawRecord& b) {
  const std::array<const std::string*, 8> x = {&a.first_name, &a.last_name, &a.birth_name, &a.city,
                                               &a.postcode,   &a.birth_year, &a.birth_month, &a.birth_day};
  const std::array<const std::string*, 8> y = {&b.first_name, &b.last_name, &b.birth_name, &b.city,
                                               &b.postcode,   &b.birth_year, &b.birth_month, &b.birth_day};
  std::size_t n = 0;
  for (std::size_t i = 0; i < 8; ++i) n += *x[i] != *y[i];
  return n;
}

}  // namespace

TEST(Synth, Deterministic) {
  SyntheticDatasetSpec spec;
  spec.records = 300;
  spec.seed = 42;
  const auto a = synthesize(spec), b = synthesize(spec);
  EXPECT_EQ(csv(a.a), csv(b.a));
  EXPECT_EQ(csv(a.b), csv(b.b));
  EXPECT_EQ(a.truth, b.truth);
  spec.seed = 43;
  EXPECT_NE(csv(synthesize(spec).a), csv(a.a));
}

TEST(Synth, ExactOverlap) {
  SyntheticDatasetSpec spec;
  const auto d = synthesize(spec);
  EXPECT_EQ(d.a.size(), 1000u);
  EXPECT_EQ(d.b.size(), 1000u);
  EXPECT_EQ(d.truth.size(), 600u);
  std::set<std::size_t> as, bs;
  for (const auto& [i, j] : d.truth) {
    EXPECT_TRUE(as.insert(i).second);
    EXPECT_TRUE(bs.insert(j).second);
    EXPECT_LT(i, d.a.size());
    EXPECT_LT(j, d.b.size());
  }
}

TEST(Synth, CleanDuplicatesAreIdentical) {
  SyntheticDatasetSpec spec;
  spec.records = 200;
  spec.corruption = 0;
  spec.birth_name_omission = 0;
  spec.shuffle_rate = 0;
  const auto d = synthesize(spec);
  for (const auto& [i, j] : d.truth) EXPECT_EQ(d.a[i], d.b[j]);
  // No entity outside the truth has an exact twin in the other set.
  std::set<std::string> b_rows;
  for (const auto& r : d.b) b_rows.insert(csv({r}));
  std::set<std::size_t> linked;
  for (const auto& t : d.truth) linked.insert(t.first);
  for (std::size_t i = 0; i < d.a.size(); ++i)
    if (!linked.count(i)) EXPECT_FALSE(b_rows.count(csv({d.a[i]})));
}

TEST(Synth, AtMostTwoErrorsPerRecord) {
  SyntheticDatasetSpec spec;
  spec.corruption = 0.9;  // push hard against the cap
  spec.birth_name_omission = 0;
  spec.shuffle_rate = 0;
  Rng rng(1);
  for (int i = 0; i < 3000; ++i) {
    const RawRecord p = random_person(rng);
    CorruptionLog log;
    const RawRecord c = corrupt_record(p, rng, spec, &log);
    ASSERT_LE(log.edits.size(), 2u);
    ASSERT_LE(field_differences(p, c), 2u);
  }
}

TEST(Synth, ZeroCorruptionIsIdentity) {
  SyntheticDatasetSpec spec;
  spec.corruption = 0;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const RawRecord p = random_person(rng);
    EXPECT_EQ(corrupt_record(p, rng, spec), p);
  }
}

TEST(Synth, EveryRecordEncodes) {
  SyntheticDatasetSpec spec;
  spec.corruption = 0.5;
  const auto d = synthesize(spec);
  for (const auto& r : d.a) EXPECT_NO_THROW(encode_record(r));
  for (const auto& r : d.b) EXPECT_NO_THROW(encode_record(r));
}

TEST(Synth, RejectsBadSpec) {
  SyntheticDatasetSpec spec;
  spec.overlap = 1.5;
  EXPECT_THROW(synthesize(spec), ConfigError);
  spec.overlap = 0.5;
  spec.corruption = -0.1;
  EXPECT_THROW(validate(spec), ConfigError);
}

TEST(Keyboard, Neighbours) {
  const std::string s = keyboard_neighbours('s');
  for (char c : std::string("awdx")) EXPECT_NE(s.find(c), std::string::npos) << c;
  EXPECT_EQ(s.find('s'), std::string::npos);
  EXPECT_EQ(s.find('q'), std::string::npos);
  // QWERTZ: z sits between t and u, y at the bottom left.
  const std::string z = keyboard_neighbours('z');
  EXPECT_NE(z.find('t'), std::string::npos);
  EXPECT_NE(z.find('u'), std::string::npos);
  EXPECT_NE(keyboard_neighbours('y').find('x'), std::string::npos);
  const std::string five = keyboard_neighbours('5');
  EXPECT_EQ(five, "46");
  EXPECT_TRUE(keyboard_neighbours('#').empty());
  // Adjacency is symmetric.
  for (char a = 'a'; a <= 'z'; ++a)
    for (char b : keyboard_neighbours(a)) EXPECT_NE(keyboard_neighbours(b).find(a), std::string::npos) << a << b;
}

TEST(Phonetic, Swaps) {
  Rng rng(3);
  std::set<std::string> seen;
  for (int i = 0; i < 200; ++i) seen.insert(*phonetic_swap("Philipp", rng));
  EXPECT_TRUE(seen.count("Filipp"));
  std::set<std::string> back;
  for (int i = 0; i < 200; ++i) back.insert(*phonetic_swap("Stefan", rng));
  EXPECT_TRUE(back.count("Stephan"));
  EXPECT_FALSE(phonetic_swap("qqq", rng));
}

TEST(Edits, Operators) {
  Rng rng(4);
  EXPECT_EQ(apply_edit("anna", Edit::Insert, false, rng).size(), 5u);
  EXPECT_EQ(apply_edit("anna", Edit::Delete, false, rng).size(), 3u);
  const auto sub = apply_edit("anna", Edit::Substitute, false, rng);
  EXPECT_EQ(sub.size(), 4u);
  EXPECT_NE(sub, "anna");
  EXPECT_EQ(apply_edit("anna", Edit::Omit, false, rng), "");
  const auto num = apply_edit("1980", Edit::Substitute, true, rng);
  EXPECT_TRUE(std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; }));
  EXPECT_EQ(apply_edit("", Edit::Insert, false, rng), "");
}

TEST(Shuffle, SwapsWithinOneGroup) {
  Rng rng(5);
  const RawRecord p{"Anna", "Meier", "Koch", "Berlin", "10115", "1980", "3", "4"};
  std::set<int> kinds;
  for (int i = 0; i < 100; ++i) {
    const RawRecord s = shuffle_group(p, rng);
    if (s.first_name == "Meier" && s.last_name == "Anna") kinds.insert(0);
    if (s.birth_day == "3" && s.birth_month == "4") kinds.insert(1);
    if (s.postcode != p.postcode) {
      kinds.insert(2);
      std::string a = s.postcode, b = p.postcode;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
    }
    EXPECT_EQ(s.city, p.city);
  }
  EXPECT_EQ(kinds.size(), 3u);
}

TEST(Files, CsvRoundTrip) {
  const std::vector<RawRecord> rows = {{"Anna", "Meier", "", "Frankfurt am Main", "60311", "1980", "3", "4"},
                                       {"Jo, \"Jr\"", "", "", "", "", "", "", ""}};
  std::istringstream in(csv(rows));
  EXPECT_EQ(read_records(in), rows);
  EXPECT_EQ(split_csv_line("a,\"b,c\",,\"d\"\"e\""), (std::vector<std::string>{"a", "b,c", "", "d\"e"}));
}

TEST(Files, RejectsBadHeader) {
  std::istringstream in("name,city\nanna,berlin\n");
  EXPECT_THROW(read_records(in), std::exception);
}

TEST(Files, TruthRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "pprl_truth_test.csv";
  const std::vector<std::pair<std::size_t, std::size_t>> t = {{0, 5}, {3, 1}};
  write_truth(path, t);
  EXPECT_EQ(read_truth(path), t);
  std::filesystem::remove(path);
}
