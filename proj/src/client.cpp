#include "pprl/client.hpp"

#include <sodium.h>

#include "pprl/net/handshake.hpp"
#include "pprl/server.hpp"

namespace pprl {

using net::MessageType;

namespace {

struct ProxyPair {
  std::shared_ptr<net::Link> p0, p1;

  ~ProxyPair() {
    if (p0) p0->close();
    if (p1) p1->close();
  }
};

std::shared_ptr<net::Link> connect(const AppConfig& config, Role self, Role proxy, std::chrono::milliseconds timeout) {
  const auto& ep = proxy == Role::P0 ? config.p0 : config.p1;
  if (!ep) throw ConfigError("endpoint of " + std::string(to_string(proxy)) + " is required");
  const int fd = net::dial_tcp(*ep, std::min<std::chrono::milliseconds>(timeout, std::chrono::seconds(5)));
  try {
    net::hello_dial(fd, self, config_digest(config.linkage), proxy);
  } catch (...) {
    net::close_fd(fd);
    throw;
  }
  return std::make_shared<net::TcpLink>(fd);
}

ProxyPair connect_both(const AppConfig& config, Role self, std::chrono::milliseconds timeout) {
  ProxyPair p;
  p.p0 = connect(config, self, Role::P0, timeout);
  p.p1 = connect(config, self, Role::P1, timeout);
  return p;
}

net::Frame expect(net::Link& link, const SessionId& id, MessageType type, Role from,
                  std::chrono::milliseconds timeout) {
  net::Frame f = link.recv(id, timeout);
  if (f.type == MessageType::Abort)
    throw net::ProtocolError(std::string(to_string(from)) + " aborted: " +
                             std::string(f.payload.begin(), f.payload.end()));
  if (f.type != type)
    throw net::ProtocolError(std::string("expected ") + net::to_string(type) + " from " +
                             std::string(to_string(from)) + ", got " + net::to_string(f.type));
  return f;
}

}  // namespace

UploadReceipt upload_records(const AppConfig& config, std::span<const EncodedRecord> records, u64 owner_id,
                             std::chrono::milliseconds timeout) {
  ensure_sodium();
  RandomStream rng(random_seed());
  DbUpload u0{owner_id, 0, {}}, u1{owner_id, 0, {}};
  randombytes_buf(&u0.nonce, sizeof(u0.nonce));
  u1.nonce = u0.nonce;
  u0.words.reserve(records.size() * protocol::kRecordWords);
  u1.words.reserve(records.size() * protocol::kRecordWords);
  for (const auto& r : records) {
    auto [s0, s1] = protocol::outsource_record(r, rng);
    u0.words.insert(u0.words.end(), s0.words.begin(), s0.words.end());
    u1.words.insert(u1.words.end(), s1.words.begin(), s1.words.end());
  }

  ProxyPair pp = connect_both(config, Role::DataOwner, timeout);
  const SessionId id = random_session_id();
  pp.p0->send(net::Frame{MessageType::DbShares, id, to_bytes(encode_db_upload(u0))});
  pp.p1->send(net::Frame{MessageType::DbShares, id, to_bytes(encode_db_upload(u1))});
  const auto a0 = net::decode_session_config(expect(*pp.p0, id, MessageType::Config, Role::P0, timeout).payload);
  const auto a1 = net::decode_session_config(expect(*pp.p1, id, MessageType::Config, Role::P1, timeout).payload);
  // Other owners may upload concurrently, so the two proxies can briefly
  // disagree; a query's CONFIG check is what enforces consistency.
  return UploadReceipt{a0.db_size, a0.db_epoch == a1.db_epoch ? a0.db_epoch : 0};
}

QueryOutcome query_record(const AppConfig& config, const EncodedRecord& query, std::chrono::milliseconds timeout) {
  const auto start = net::Clock::now();
  RandomStream rng(random_seed());
  auto [q0, q1] = protocol::outsource_record(query, rng);

  ProxyPair pp = connect_both(config, Role::QueryClient, timeout);
  const SessionId id = random_session_id();
  pp.p0->send(net::Frame{MessageType::QueryShares, id, to_bytes(q0.words)});
  pp.p1->send(net::Frame{MessageType::QueryShares, id, to_bytes(q1.words)});

  QueryOutcome out;
  out.p0 = protocol::decode_result(
      Party::P0, from_bytes(expect(*pp.p0, id, MessageType::Result, Role::P0, timeout).payload));
  out.p1 = protocol::decode_result(
      Party::P1, from_bytes(expect(*pp.p1, id, MessageType::Result, Role::P1, timeout).payload));
  out.result = protocol::reveal_result(out.p0, out.p1, config.linkage.disclosure);
  out.wall = std::chrono::duration_cast<std::chrono::microseconds>(net::Clock::now() - start);
  return out;
}

}  // namespace pprl
