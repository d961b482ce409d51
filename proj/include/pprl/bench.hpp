#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pprl/config.hpp"
#include "pprl/protocol.hpp"

namespace pprl::bench {

/// Where the three parties run: threads over in-memory links, threads
/// over loopback TCP, or separate `pprl party` processes.
enum class Engine { Memory, Tcp, Processes };

Engine parse_engine(std::string_view s);
std::string_view to_string(Engine e);

struct BenchRow {
  std::size_t size = 0;
  double seconds = 0;
  u64 bytes = 0;  // every frame of the session, all three links
  u64 peer_rounds = 0;
  u64 helper_rounds = 0;
  bool ok = false;
  std::string error;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct BenchOptions {
  std::vector<std::size_t> sizes = {1, 10, 25, 100, 250, 1000};
  std::string preset = "off";
  Engine engine = Engine::Tcp;
  std::uint64_t seed = 1;
  LinkageConfig linkage;
  std::filesystem::path pprl_exe;  // for Engine::Processes
  std::filesystem::path workdir = std::filesystem::temp_directory_path() / "pprl-bench";
};

/// Bytes of one session as reported by both proxies.
u64 session_bytes(const protocol::MeterSummary& p0, const protocol::MeterSummary& p1);

/// One single-query session per size. Failures are recorded, not thrown.
std::vector<BenchRow> run(const BenchOptions& options);

}  // namespace pprl::bench
