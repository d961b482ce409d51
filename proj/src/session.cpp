#include "pprl/mpc/session.hpp"

#include "pprl/linkage.hpp"

namespace pprl::mpc {

using net::MessageType;

PairSeeds PairSeeds::from_master(const Seed128& master) {
  return PairSeeds{derive_pair_seed(master, StreamPair::P0P1), derive_pair_seed(master, StreamPair::P0Helper),
                   derive_pair_seed(master, StreamPair::P1Helper)};
}

std::chrono::microseconds SessionMeter::phase(std::string_view name) const {
  std::chrono::microseconds total{0};
  for (const auto& [n, t] : phases)
    if (n == name) total += t;
  return total;
}

namespace {

std::size_t slot(Role r) {
  if (!is_party(r)) throw std::invalid_argument("not a computing party: " + std::string(to_string(r)));
  return static_cast<std::size_t>(r);
}

std::optional<StreamPair> pair_of(Role a, Role b) {
  auto is = [&](Role x, Role y) { return (a == x && b == y) || (a == y && b == x); };
  if (is(Role::P0, Role::P1)) return StreamPair::P0P1;
  if (is(Role::P0, Role::Helper)) return StreamPair::P0Helper;
  if (is(Role::P1, Role::Helper)) return StreamPair::P1Helper;
  return std::nullopt;
}

const std::optional<Seed128>& seed_for(const PairSeeds& seeds, StreamPair p) {
  switch (p) {
    case StreamPair::P0P1: return seeds.p0_p1;
    case StreamPair::P0Helper: return seeds.p0_helper;
    case StreamPair::P1Helper: return seeds.p1_helper;
  }
  return seeds.p0_p1;
}

}  // namespace

Session::Session(Role self, SessionId id, Links links, const PairSeeds& seeds, net::Timeout timeout)
    : self_(self), id_(id), links_(std::move(links)), timeout_(timeout) {
  slot(self);
  for (Role other : {Role::P0, Role::P1, Role::Helper}) {
    if (other == self) continue;
    const StreamPair pair = *pair_of(self, other);
    const auto& master = seed_for(seeds, pair);
    if (!master)
      throw ConfigError(std::string(to_string(self)) + " has no seed for its stream with " +
                        std::string(to_string(other)));
    streams_[slot(other)] = std::make_unique<RandomStream>(derive_session_seed(*master, pair, id_));
  }
}

Session::~Session() = default;

Party Session::party() const {
  if (!is_proxy(self_)) throw std::logic_error("the helper holds no shares");
  return self_ == Role::P0 ? Party::P0 : Party::P1;
}

Role Session::peer() const {
  if (!is_proxy(self_)) throw std::logic_error("the helper has no peer proxy");
  return self_ == Role::P0 ? Role::P1 : Role::P0;
}

RandomStream& Session::stream_with(Role other) {
  auto& s = streams_[slot(other)];
  if (!s) throw std::logic_error("no stream between a party and itself");
  return *s;
}

net::Link& Session::link(Role to) {
  auto& l = links_[slot(to)];
  if (!l) throw std::logic_error(std::string(to_string(self_)) + " has no link to " + std::string(to_string(to)));
  return *l;
}

void Session::send(Role to, MessageType type, std::span<const u64> words) {
  send_bytes(to, type, to_bytes(words));
}

void Session::send_bytes(Role to, MessageType type, std::vector<std::uint8_t> payload) {
  net::Frame f{type, id_, std::move(payload)};
  const std::size_t size = f.wire_size();
  link(to).send(f);
  const auto k = slot(to);
  meter_.bytes_sent[k] += size;
  meter_.frames_sent[k] += 1;
  if (type == MessageType::Open) meter_.open_frames_sent[k] += 1;
}

net::Frame Session::recv_frame(Role from, MessageType expected) {
  net::Frame f = link(from).recv(id_, timeout_);
  const auto k = slot(from);
  meter_.bytes_received[k] += f.wire_size();
  meter_.frames_received[k] += 1;
  if (tap_) tap_(from, f);
  if (f.type == MessageType::Abort) {
    const std::string reason(f.payload.begin(), f.payload.end());
    // The third party may be blocked on us; pass the abort on.
    if (!aborted_) {
      aborted_ = true;
      for (Role r : {Role::P0, Role::P1, Role::Helper}) {
        if (r == self_ || r == from || !links_[slot(r)]) continue;
        try {
          links_[slot(r)]->send(net::Frame{MessageType::Abort, id_, f.payload});
        } catch (...) {
        }
      }
    }
    throw SessionAborted(std::string(to_string(from)) + " aborted the session: " + reason);
  }
  if (f.type != expected)
    throw net::ProtocolError(std::string("expected ") + net::to_string(expected) + " from " +
                             std::string(to_string(from)) + ", got " + net::to_string(f.type));
  return f;
}

std::vector<u64> Session::recv(Role from, MessageType expected, std::size_t expected_words) {
  net::Frame f = recv_frame(from, expected);
  auto words = from_bytes(f.payload);
  if (words.size() != expected_words)
    throw net::ProtocolError(std::string(net::to_string(expected)) + " from " + std::string(to_string(from)) +
                             " carries " + std::to_string(words.size()) + " words, expected " +
                             std::to_string(expected_words));
  return words;
}

std::vector<u64> Session::exchange(std::span<const u64> mine) {
  const Role other = peer();
  send(other, MessageType::Open, mine);
  meter_.peer_rounds += 1;
  return recv(other, MessageType::Open, mine.size());
}

void Session::abort(std::string_view reason) noexcept {
  aborted_ = true;
  std::vector<std::uint8_t> text(reason.begin(), reason.end());
  for (Role r : {Role::P0, Role::P1, Role::Helper}) {
    if (r == self_ || !links_[slot(r)]) continue;
    try {
      links_[slot(r)]->send(net::Frame{MessageType::Abort, id_, text});
    } catch (...) {
    }
  }
}

void Session::retire() noexcept {
  for (auto& l : links_)
    if (l) l->inbox().retire(id_);
}

Session::Phase::~Phase() {
  s_.meter_.phases.emplace_back(
      name_, std::chrono::duration_cast<std::chrono::microseconds>(net::Clock::now() - start_));
}

}  // namespace pprl::mpc
