#include <gtest/gtest.h>

#include "pprl/config.hpp"

using namespace pprl;

TEST(Config, Defaults) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.linkage, default_linkage_config());
  EXPECT_EQ(c.preset.name, "off");
  EXPECT_FALSE(c.p0);
}

TEST(Config, FullExample) {
  const auto c = parse_config(R"({
    "weights": {"name": 900, "city": 500, "postcode": 700, "birth_year": 300, "birth_month": 200, "birth_day": 250},
    "threshold": 0.8,
    "disclosure": "full",
    "seeds": {"master": "00112233445566778899aabbccddeeff"},
    "endpoints": {"p0": "127.0.0.1:7001", "p1": "10.0.0.2:7002"},
    "net_preset": "b"
  })");
  EXPECT_EQ(c.linkage.weights, (std::array<u64, kFieldCount>{900, 500, 700, 300, 200, 250}));
  EXPECT_EQ(c.linkage.tau_fixed, threshold_to_fixed(0.8));
  EXPECT_EQ(c.linkage.disclosure, Disclosure::Full);
  EXPECT_TRUE(c.seeds.p0_p1 && c.seeds.p0_helper && c.seeds.p1_helper);
  EXPECT_EQ(c.p1->host, "10.0.0.2");
  EXPECT_EQ(c.preset.name, "b");
}

TEST(Config, FieldStatistics) {
  const auto c = parse_config(R"({"field_stats": {
    "name": {"frequency": 0.0009765625, "error_rate": 0.01},
    "city": {"frequency": 0.5},
    "postcode": {"frequency": 0.5, "error_rate": 0.5},
    "birth_year": {"frequency": 0.25}, "birth_month": {"frequency": 0.125}, "birth_day": {"frequency": 0.03125}}})");
  EXPECT_EQ(c.linkage.weights, (std::array<u64, kFieldCount>{639, 64, 1, 128, 192, 320}));
}

TEST(Config, ReportsEveryProblem) {
  try {
    parse_config(R"({"weights": {"name": 9000, "city": 1}, "threshold": 1.5})");
    FAIL() << "accepted an invalid config";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("postcode"), std::string::npos);
    EXPECT_NE(msg.find("threshold"), std::string::npos);
    EXPECT_NE(msg.find("budget"), std::string::npos);
  }
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("not json"), ConfigError);
  EXPECT_THROW(parse_config("[]"), ConfigError);
  EXPECT_THROW(parse_config(R"({"threshold": 0})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"disclosure": "all"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"seeds": {"master": "xyz"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"endpoints": {"p0": "nohost"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"net_preset": "z"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"threshold": "high"})"), ConfigError);
}

TEST(Config, DumpRoundTrips) {
  AppConfig c = parse_config(R"({"threshold": 0.7, "disclosure": "bit", "seeds": {"master": "ab"},
                                 "endpoints": {"p0": "127.0.0.1:1", "p1": "127.0.0.1:2"}})");
  const auto back = parse_config(dump_config(c, true));
  EXPECT_EQ(back.linkage, c.linkage);
  EXPECT_EQ(back.seeds.p0_p1, c.seeds.p0_p1);
  EXPECT_EQ(back.p1->port, 2);
  EXPECT_FALSE(parse_config(dump_config(c, false)).seeds.p0_p1);
}

TEST(Config, DigestCoversLinkageSettings) {
  const auto base = default_linkage_config();
  auto other = base;
  EXPECT_EQ(config_digest(base), config_digest(other));
  other.tau_fixed += 1;
  EXPECT_NE(config_digest(base), config_digest(other));
  other = base;
  other.weights[3] += 1;
  EXPECT_NE(config_digest(base), config_digest(other));
  other = base;
  other.disclosure = Disclosure::Bit;
  EXPECT_NE(config_digest(base), config_digest(other));
}
