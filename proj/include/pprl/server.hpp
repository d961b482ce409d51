#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "pprl/config.hpp"
#include "pprl/protocol.hpp"

namespace pprl {

/// Parsed DB_SHARES payload: [owner id, upload nonce, record count, words...].
struct DbUpload {
  u64 owner = 0;
  u64 nonce = 0;
  std::vector<u64> words;  // count * kRecordWords

  std::size_t count() const { return words.size() / protocol::kRecordWords; }
};

std::vector<u64> encode_db_upload(const DbUpload& u);
DbUpload decode_db_upload(std::span<const u64> words);

/// A proxy's database: one contiguous index range per data owner, ordered by
/// owner id. An upload replaces that owner's whole range.
class DatabaseStore {
 public:
  explicit DatabaseStore(Party party) : party_(party) {}

  void ingest(DbUpload upload);

  struct Snapshot {
    std::shared_ptr<const protocol::SharedDatabase> db;
    u64 epoch = 0;
  };
  Snapshot snapshot() const;

  /// First global index of each owner's records.
  std::map<u64, std::size_t> owner_offsets() const;

 private:
  Party party_;
  mutable std::mutex mu_;
  std::map<u64, DbUpload> owners_;
  Snapshot current_{std::make_shared<protocol::SharedDatabase>(Party::P0), 0};
};

/// Hash of the sorted (owner, nonce, count) entries; equal on both proxies iff
/// they hold the same uploads.
u64 database_epoch(const std::map<u64, DbUpload>& owners);

/// One computing party (P0, P1 or helper) serving linkage sessions over TCP.
///
/// P1 dials P0; the helper dials both proxies. Data owners and query clients
/// connect to both proxies. Every connection starts with a HELLO exchange
/// checking protocol version and config digest.
class PartyServer {
 public:
  PartyServer(Role role, AppConfig config, net::Endpoint listen);
  ~PartyServer();
  PartyServer(const PartyServer&) = delete;
  PartyServer& operator=(const PartyServer&) = delete;

  /// Binds and starts background threads; returns once listening.
  void start();
  /// Blocks until stop() is called from another thread.
  void wait();
  void stop();

  std::uint16_t port() const { return port_; }
  Role role() const { return role_; }

  /// Waits until links to both other parties are up.
  bool mesh_ready(std::chrono::milliseconds timeout);

  std::size_t sessions_completed() const { return completed_; }
  std::size_t sessions_failed() const { return failed_; }

 private:
  void accept_loop();
  void handle_connection(int fd);
  void serve_client(std::shared_ptr<net::Link> link, Role who);
  void maintain_links();
  void install_peer(Role peer, std::shared_ptr<net::Link> link);
  mpc::Session::Links links_snapshot();

  void proxy_session(SessionId id, std::vector<u64> query, std::shared_ptr<net::Link> client);
  void helper_session(SessionId id);
  void spawn(std::function<void()> fn);

  Role role_;
  AppConfig config_;
  net::Digest digest_;
  net::Endpoint listen_ep_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;

  std::unique_ptr<DatabaseStore> store_;

  std::mutex mu_;
  std::condition_variable cv_;
  mpc::Session::Links links_;
  std::set<SessionId> helper_started_;
  std::vector<std::shared_ptr<net::Link>> clients_;
  std::size_t active_ = 0;
  bool stopping_ = false;
  bool stopped_ = false;

  std::atomic<std::size_t> completed_{0};
  std::atomic<std::size_t> failed_{0};
  std::thread acceptor_;
  std::thread maintainer_;
};

}  // namespace pprl
