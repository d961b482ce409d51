#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pprl/process.hpp"

namespace fs = std::filesystem;
using namespace pprl;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(PPRL_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() / ("pprl-cli-" + std::to_string(::getpid()));
  void SetUp() override { fs::create_directories(dir); }
  void TearDown() override { fs::remove_all(dir); }
  std::string at(const char* name) const { return (dir / name).string(); }
};

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_F(Cli, SynthAndEvaluate) {
  ASSERT_EQ(cli("synth --records 150 --seed 1f --out " + dir.string()).code, 0);
  EXPECT_TRUE(fs::exists(dir / "a.csv"));
  EXPECT_TRUE(fs::exists(dir / "truth.csv"));
  const auto r = cli("evaluate --a " + at("a.csv") + " --b " + at("b.csv") + " --truth " + at("truth.csv") +
                     " --thresholds 0.6,0.7,0.8");
  ASSERT_EQ(r.code, 0);
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0], "tau,fp,fn,total");
  EXPECT_EQ(l[1].rfind("0.6,", 0), 0u);
}

TEST_F(Cli, InvalidWeightsExitNonzero) {
  std::ofstream(at("bad.json")) << R"({"weights": {"name": 9000, "city": 600, "postcode": 500,
      "birth_year": 400, "birth_month": 200, "birth_day": 300}})";
  ASSERT_EQ(cli("synth --records 10 --out " + dir.string()).code, 0);
  EXPECT_EQ(cli("evaluate --config " + at("bad.json") + " --a " + at("a.csv") + " --b " + at("b.csv") +
                " --truth " + at("truth.csv"))
                .code,
            2);
  EXPECT_EQ(cli("synth --overlap 2 --out " + dir.string()).code, 2);
  EXPECT_NE(cli("party --role p7").code, 0);
  EXPECT_NE(cli("frobnicate").code, 0);
}

TEST_F(Cli, ProcessesEndToEnd) {
  ASSERT_EQ(cli("synth --records 20 --seed 2 --out " + dir.string()).code, 0);
  AppConfig c;
  c.linkage = default_linkage_config();
  c.linkage.disclosure = Disclosure::Bit;
  c.seeds = mpc::PairSeeds::from_master(random_seed());
  ProcessMesh mesh(PPRL_CLI_PATH, c, dir / "mesh");
  const std::string cfg = " --config " + mesh.config_path().string();
  const auto up = cli("upload --records " + at("b.csv") + cfg);
  ASSERT_EQ(up.code, 0) << up.out;
  const auto q = cli("query --records " + at("a.csv") + " --row 0" + cfg);
  ASSERT_EQ(q.code, 0);
  const auto l = lines(q.out);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0], "query,matched");
  EXPECT_TRUE(l[1] == "0,yes" || l[1] == "0,no") << l[1];
  // Changing the disclosure on the client alone changes the config digest.
  EXPECT_NE(cli("query --records " + at("a.csv") + " --row 0 --disclosure index" + cfg).code, 0);
  mesh.stop();
  EXPECT_NE(cli("query --records " + at("a.csv") + " --row 0" + cfg).code, 0);
}

TEST_F(Cli, BenchOverProcesses) {
  const auto r = cli("bench --engine processes --sizes 1,8,16");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0], "size,seconds,mb,peer_rounds,helper_rounds,status");
  for (std::size_t i = 1; i < l.size(); ++i) EXPECT_NE(l[i].find(",ok"), std::string::npos) << l[i];
}
