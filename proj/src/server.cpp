#include "pprl/server.hpp"

#include <netinet/in.h>
#include <sys/socket.h>

#include <iostream>

#include <sodium.h>

#include "pprl/net/handshake.hpp"

namespace pprl {

using net::MessageType;

namespace {

std::mutex log_mu;

void log(Role self, const std::string& msg) {
  std::lock_guard lock(log_mu);
  std::cerr << "[" << to_string(self) << "] " << msg << "\n";
}

std::size_t slot(Role r) { return static_cast<std::size_t>(r); }

std::vector<std::uint8_t> text_bytes(std::string_view s) { return {s.begin(), s.end()}; }

std::array<Role, 2> others(Role self) {
  switch (self) {
    case Role::P0: return {Role::P1, Role::Helper};
    case Role::P1: return {Role::P0, Role::Helper};
    default: return {Role::P0, Role::P1};
  }
}

}  // namespace

// ------------------------------------------------------------------ uploads

std::vector<u64> encode_db_upload(const DbUpload& u) {
  std::vector<u64> w;
  w.reserve(3 + u.words.size());
  w.push_back(u.owner);
  w.push_back(u.nonce);
  w.push_back(u.count());
  w.insert(w.end(), u.words.begin(), u.words.end());
  return w;
}

DbUpload decode_db_upload(std::span<const u64> w) {
  if (w.size() < 3) throw net::ProtocolError("DB_SHARES payload too short");
  const u64 count = w[2];
  if (count > (w.size() - 3) / protocol::kRecordWords || w.size() - 3 != count * protocol::kRecordWords)
    throw net::ProtocolError("DB_SHARES announces " + std::to_string(count) + " records but carries " +
                             std::to_string(w.size() - 3) + " words");
  return DbUpload{w[0], w[1], std::vector<u64>(w.begin() + 3, w.end())};
}

u64 database_epoch(const std::map<u64, DbUpload>& owners) {
  ensure_sodium();
  std::vector<std::uint8_t> msg;
  const std::string_view domain = "pprl-epoch-v1";
  msg.insert(msg.end(), domain.begin(), domain.end());
  for (const auto& [owner, u] : owners) {
    append_le64(msg, owner);
    append_le64(msg, u.nonce);
    append_le64(msg, u.count());
  }
  std::array<std::uint8_t, 8> out{};
  crypto_generichash(out.data(), out.size(), msg.data(), msg.size(), nullptr, 0);
  return load_le64(out.data());
}

void DatabaseStore::ingest(DbUpload upload) {
  std::lock_guard lock(mu_);
  if (upload.count() == 0)
    owners_.erase(upload.owner);
  else
    owners_[upload.owner] = std::move(upload);
  std::vector<u64> words;
  for (const auto& [owner, u] : owners_) words.insert(words.end(), u.words.begin(), u.words.end());
  current_ = Snapshot{std::make_shared<protocol::SharedDatabase>(party_, std::move(words)), database_epoch(owners_)};
}

DatabaseStore::Snapshot DatabaseStore::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

std::map<u64, std::size_t> DatabaseStore::owner_offsets() const {
  std::lock_guard lock(mu_);
  std::map<u64, std::size_t> out;
  std::size_t at = 0;
  for (const auto& [owner, u] : owners_) {
    out[owner] = at;
    at += u.count();
  }
  return out;
}

// ------------------------------------------------------------------- server

PartyServer::PartyServer(Role role, AppConfig config, net::Endpoint listen)
    : role_(role), config_(std::move(config)), digest_(config_digest(config_.linkage)), listen_ep_(std::move(listen)) {
  if (!is_party(role_)) throw ConfigError("a party server must be p0, p1 or helper");
  const auto& s = config_.seeds;
  const bool ok = role_ == Role::P0   ? s.p0_p1 && s.p0_helper
                  : role_ == Role::P1 ? s.p0_p1 && s.p1_helper
                                      : s.p0_helper && s.p1_helper;
  if (!ok) throw ConfigError(std::string(to_string(role_)) + " is missing a pairwise seed");
  if (role_ != Role::P0 && !config_.p0) throw ConfigError("endpoint of p0 is required");
  if (role_ == Role::Helper && !config_.p1) throw ConfigError("endpoint of p1 is required");
  if (is_proxy(role_)) store_ = std::make_unique<DatabaseStore>(role_ == Role::P0 ? Party::P0 : Party::P1);
}

PartyServer::~PartyServer() { stop(); }

void PartyServer::start() {
  if (role_ != Role::Helper) {
    listen_fd_ = net::listen_tcp(listen_ep_);
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
  }
  if (role_ != Role::P0) maintainer_ = std::thread([this] { maintain_links(); });
}

void PartyServer::wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return stopping_; });
}

void PartyServer::stop() {
  mpc::Session::Links links;
  std::vector<std::shared_ptr<net::Link>> clients;
  {
    std::lock_guard lock(mu_);
    if (stopped_) return;
    stopped_ = true;
    stopping_ = true;
    links = links_;
    clients = clients_;
  }
  cv_.notify_all();
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  for (auto& l : links)
    if (l) l->close();
  for (auto& c : clients) c->close();
  if (acceptor_.joinable()) acceptor_.join();
  if (maintainer_.joinable()) maintainer_.join();
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return active_ == 0; });
    links_ = {};
    clients_.clear();
  }
  net::close_fd(listen_fd_);
  listen_fd_ = -1;
}

bool PartyServer::mesh_ready(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] {
    for (Role r : others(role_))
      if (!links_[slot(r)] || links_[slot(r)]->inbox().closed()) return false;
    return true;
  });
}

void PartyServer::spawn(std::function<void()> fn) {
  {
    std::lock_guard lock(mu_);
    ++active_;
  }
  std::thread([this, fn = std::move(fn)]() mutable {
    try {
      fn();
    } catch (const std::exception& e) {
      log(role_, e.what());
    }
    fn = nullptr;
    std::lock_guard lock(mu_);
    --active_;
    cv_.notify_all();
  }).detach();
}

mpc::Session::Links PartyServer::links_snapshot() {
  std::lock_guard lock(mu_);
  return links_;
}

void PartyServer::install_peer(Role peer, std::shared_ptr<net::Link> link) {
  std::shared_ptr<net::Link> old;
  {
    std::lock_guard lock(mu_);
    if (stopping_) {
      link->close();
      return;
    }
    old = std::exchange(links_[slot(peer)], std::move(link));
  }
  cv_.notify_all();
  if (old) old->close();
}

void PartyServer::accept_loop() {
  for (;;) {
    int fd = -1;
    try {
      fd = net::accept_tcp(listen_fd_);
    } catch (const std::exception&) {
      return;
    }
    {
      std::lock_guard lock(mu_);
      if (stopping_) {
        net::close_fd(fd);
        return;
      }
    }
    spawn([this, fd] { handle_connection(fd); });
  }
}

void PartyServer::handle_connection(int fd) {
  net::Hello hello;
  try {
    hello = net::hello_accept(fd, role_, digest_);
  } catch (const std::exception& e) {
    log(role_, std::string("handshake failed: ") + e.what());
    net::close_fd(fd);
    return;
  }
  const Role who = hello.role;
  const bool allowed = who == Role::DataOwner || who == Role::QueryClient || who == Role::Helper ||
                       (role_ == Role::P0 && who == Role::P1);
  auto link = std::make_shared<net::TcpLink>(fd);
  if (!allowed) {
    try {
      link->send(net::Frame{MessageType::Abort, SessionId{},
                            text_bytes(std::string(to_string(role_)) + " does not accept " + std::string(to_string(who)))});
    } catch (...) {
    }
    link->close();
    return;
  }
  if (is_party(who)) {
    install_peer(who, net::maybe_shape(link, config_.preset, role_, who));
    return;
  }
  {
    std::lock_guard lock(mu_);
    clients_.push_back(link);
  }
  serve_client(link, who);
  std::lock_guard lock(mu_);
  std::erase(clients_, link);
}

void PartyServer::serve_client(std::shared_ptr<net::Link> link, Role who) {
  for (;;) {
    net::Frame f;
    try {
      f = link->inbox().pop_any();
    } catch (const net::LinkClosed&) {
      return;
    }
    try {
      switch (f.type) {
        case MessageType::DbShares: {
          store_->ingest(decode_db_upload(from_bytes(f.payload)));
          const auto snap = store_->snapshot();
          link->send(net::Frame{MessageType::Config, f.session,
                                net::encode_session_config({digest_, snap.db->size(), snap.epoch})});
          break;
        }
        case MessageType::QueryShares: {
          auto words = from_bytes(f.payload);
          if (words.size() != protocol::kRecordWords)
            throw net::ProtocolError("QUERY_SHARES must carry one record");
          spawn([this, id = f.session, words = std::move(words), link]() mutable {
            proxy_session(id, std::move(words), link);
          });
          break;
        }
        default:
          throw net::ProtocolError(std::string("unexpected ") + net::to_string(f.type) + " from " +
                                   std::string(to_string(who)));
      }
    } catch (const net::LinkClosed&) {
      return;
    } catch (const std::exception& e) {
      log(role_, e.what());
      try {
        link->send(net::Frame{MessageType::Abort, f.session, text_bytes(e.what())});
      } catch (...) {
        return;
      }
    }
  }
}

void PartyServer::proxy_session(SessionId id, std::vector<u64> query, std::shared_ptr<net::Link> client) {
  auto fail_client = [&](std::string_view reason) {
    try {
      client->send(net::Frame{MessageType::Abort, id, text_bytes(reason)});
    } catch (...) {
    }
  };
  if (!mesh_ready(std::chrono::seconds(10))) {
    ++failed_;
    fail_client(std::string(to_string(role_)) + " is not connected to both other parties");
    return;
  }
  const auto snap = store_->snapshot();
  mpc::Session s(role_, id, links_snapshot(), config_.seeds);
  try {
    const net::SessionConfig mine{digest_, snap.db->size(), snap.epoch};
    const auto payload = net::encode_session_config(mine);
    s.send_bytes(s.peer(), MessageType::Config, payload);
    s.send_bytes(Role::Helper, MessageType::Config, payload);
    const auto theirs = net::decode_session_config(s.recv_frame(s.peer(), MessageType::Config).payload);
    if (theirs.config_digest != mine.config_digest) throw net::ProtocolError("proxies disagree on the config");
    if (theirs != mine)
      throw net::ProtocolError("proxies hold different databases (" + std::to_string(mine.db_size) + " vs " +
                               std::to_string(theirs.db_size) + " records)");
    if (mine.db_size == 0) throw net::ProtocolError("database is empty");

    const protocol::SharedRecord q{s.party(), std::move(query)};
    const auto result = protocol::run_proxy_session(s, q, *snap.db, config_.linkage);
    client->send(net::Frame{MessageType::Result, id, to_bytes(protocol::encode_result(result))});
    ++completed_;
  } catch (const mpc::SessionAborted& e) {
    ++failed_;
    fail_client(e.what());
  } catch (const std::exception& e) {
    ++failed_;
    log(role_, std::string("session failed: ") + e.what());
    s.abort(e.what());
    fail_client(e.what());
  }
  s.retire();
}

void PartyServer::helper_session(SessionId id) {
  // The first frame can beat the installation of the link it arrived on.
  if (!mesh_ready(std::chrono::seconds(10))) {
    ++failed_;
    return;
  }
  mpc::Session s(Role::Helper, id, links_snapshot(), config_.seeds);
  try {
    const auto c0 = net::decode_session_config(s.recv_frame(Role::P0, MessageType::Config).payload);
    const auto c1 = net::decode_session_config(s.recv_frame(Role::P1, MessageType::Config).payload);
    if (c0.config_digest != digest_ || c1.config_digest != digest_)
      throw net::ProtocolError("config digest mismatch at the helper");
    if (c0 != c1) throw net::ProtocolError("proxies announced different databases to the helper");
    if (c0.db_size == 0) throw net::ProtocolError("database is empty");
    protocol::helper::run_helper_session(s, c0.db_size, config_.linkage.disclosure);
    ++completed_;
  } catch (const mpc::SessionAborted&) {
    ++failed_;
  } catch (const std::exception& e) {
    ++failed_;
    log(role_, std::string("session failed: ") + e.what());
    s.abort(e.what());
  }
  s.retire();
}

void PartyServer::maintain_links() {
  std::vector<Role> targets = {Role::P0};
  if (role_ == Role::Helper) targets.push_back(Role::P1);
  for (;;) {
    {
      std::unique_lock lock(mu_);
      if (stopping_) return;
    }
    for (Role t : targets) {
      {
        std::lock_guard lock(mu_);
        if (links_[slot(t)] && !links_[slot(t)]->inbox().closed()) continue;
      }
      const net::Endpoint& ep = t == Role::P0 ? *config_.p0 : *config_.p1;
      int fd = -1;
      try {
        fd = net::dial_tcp(ep, std::chrono::milliseconds(200));
        net::hello_dial(fd, role_, digest_, t);
      } catch (const std::exception&) {
        net::close_fd(fd);
        continue;
      }
      auto link = std::make_shared<net::TcpLink>(fd);
      if (role_ == Role::Helper) {
        link->inbox().on_new_session([this](const SessionId& id) {
          {
            std::lock_guard lock(mu_);
            if (stopping_ || !helper_started_.insert(id).second) return;
          }
          spawn([this, id] { helper_session(id); });
        });
      }
      install_peer(t, net::maybe_shape(link, config_.preset, role_, t));
    }
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, std::chrono::milliseconds(100), [&] { return stopping_; });
  }
}

}  // namespace pprl
