#pragma once

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "pprl/config.hpp"

namespace pprl {

/// A child process started with posix_spawn; killed and reaped on
/// destruction.
class ChildProcess {
 public:
  ChildProcess(const std::filesystem::path& exe, const std::vector<std::string>& args,
               const std::filesystem::path& log_file = {});
  ~ChildProcess();
  ChildProcess(ChildProcess&& other) noexcept : pid_(std::exchange(other.pid_, -1)) {}
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  pid_t pid() const { return pid_; }
  bool running();
  /// SIGTERM, then SIGKILL after the grace period; returns the wait status.
  int terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(2000));

 private:
  pid_t pid_ = -1;
};

/// P0, P1 and the helper as three `pprl party` processes on loopback.
class ProcessMesh {
 public:
  /// Writes the config (with seeds and endpoints) into `workdir` and starts
  /// the parties. Ports are picked from the free ephemeral range.
  ProcessMesh(const std::filesystem::path& pprl_exe, AppConfig config, const std::filesystem::path& workdir);

  const AppConfig& config() const { return config_; }
  const std::filesystem::path& config_path() const { return config_path_; }
  void stop();

 private:
  AppConfig config_;
  std::filesystem::path config_path_;
  std::vector<ChildProcess> children_;
};

/// A TCP port that was free a moment ago.
std::uint16_t free_port();

/// Path of the running executable.
std::filesystem::path self_exe();

}  // namespace pprl
