#include "pprl/process.hpp"

#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <thread>

#include "pprl/client.hpp"
#include "pprl/net/handshake.hpp"

extern char** environ;

namespace pprl {

ChildProcess::ChildProcess(const std::filesystem::path& exe, const std::vector<std::string>& args,
                           const std::filesystem::path& log_file) {
  std::vector<std::string> argv_store;
  argv_store.push_back(exe.string());
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (!log_file.empty()) {
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_file.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  }
  const int rc = posix_spawn(&pid_, exe.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw std::runtime_error("cannot start " + exe.string() + ": " + std::strerror(rc));
}

ChildProcess::~ChildProcess() {
  if (pid_ > 0) terminate();
}

bool ChildProcess::running() {
  if (pid_ <= 0) return false;
  int status = 0;
  const pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) {
    pid_ = -1;
    return false;
  }
  return true;
}

int ChildProcess::terminate(std::chrono::milliseconds grace) {
  if (pid_ <= 0) return 0;
  ::kill(pid_, SIGTERM);
  const auto deadline = std::chrono::steady_clock::now() + grace;
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_ || r < 0) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  pid_ = -1;
  return status;
}

std::uint16_t free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw std::runtime_error("cannot find a free port");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

std::filesystem::path self_exe() { return std::filesystem::read_symlink("/proc/self/exe"); }

namespace {

// Ready once a client handshake with both proxies succeeds.
bool wait_ready(const AppConfig& c, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  const auto digest = config_digest(c.linkage);
  for (const auto& [ep, role] : {std::pair{*c.p0, Role::P0}, std::pair{*c.p1, Role::P1}}) {
    for (;;) {
      try {
        const int fd = net::dial_tcp(ep, std::chrono::milliseconds(100));
        net::hello_dial(fd, Role::QueryClient, digest, role);
        net::close_fd(fd);
        break;
      } catch (const std::exception&) {
        if (std::chrono::steady_clock::now() >= deadline) return false;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    }
  }
  return true;
}

}  // namespace

ProcessMesh::ProcessMesh(const std::filesystem::path& exe, AppConfig config, const std::filesystem::path& workdir)
    : config_(std::move(config)) {
  std::filesystem::create_directories(workdir);
  config_.p0 = net::Endpoint{"127.0.0.1", free_port()};
  config_.p1 = net::Endpoint{"127.0.0.1", free_port()};
  config_.helper = net::Endpoint{"127.0.0.1", free_port()};
  config_path_ = workdir / "config.json";
  {
    std::ofstream out(config_path_);
    out << dump_config(config_, true);
  }
  for (const char* role : {"p0", "p1", "helper"})
    children_.emplace_back(exe, std::vector<std::string>{"party", "--role", role, "--config", config_path_.string()},
                           workdir / (std::string(role) + ".log"));
  if (!wait_ready(config_, std::chrono::seconds(20))) {
    stop();
    throw std::runtime_error("party processes did not come up; see logs in " + workdir.string());
  }
}

void ProcessMesh::stop() {
  for (auto& c : children_) c.terminate();
  children_.clear();
}

}  // namespace pprl
