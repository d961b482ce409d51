#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pprl/net/transport.hpp"
#include "pprl/random_stream.hpp"
#include "pprl/ring.hpp"
#include "pprl/role.hpp"

namespace pprl::mpc {

/// Long-term seeds of the three pairwise streams. A party only needs the two
/// that involve it.
struct PairSeeds {
  std::optional<Seed128> p0_p1;
  std::optional<Seed128> p0_helper;
  std::optional<Seed128> p1_helper;

  static PairSeeds from_master(const Seed128& master);
};

class SessionAborted : public net::ProtocolError {
 public:
  using net::ProtocolError::ProtocolError;
};

/// Per-session accounting. Indexed by the other party's role (P0, P1, Helper).
struct SessionMeter {
  std::uint64_t peer_rounds = 0;    // proxy<->proxy openings
  std::uint64_t helper_rounds = 0;  // masked openings sent to the helper
  std::array<std::uint64_t, 3> bytes_sent{};
  std::array<std::uint64_t, 3> bytes_received{};
  std::array<std::uint64_t, 3> frames_sent{};
  std::array<std::uint64_t, 3> frames_received{};
  std::array<std::uint64_t, 3> open_frames_sent{};
  std::uint64_t triples = 0;
  std::uint64_t bool_triples = 0;
  std::uint64_t dot_triples = 0;
  std::vector<std::pair<std::string, std::chrono::microseconds>> phases;

  std::uint64_t total_bytes_sent() const { return bytes_sent[0] + bytes_sent[1] + bytes_sent[2]; }
  std::chrono::microseconds phase(std::string_view name) const;
};

/// One party's view of one linkage session: its links to the other two
/// parties, the pairwise random streams derived for this session, and the
/// meter. All protocol steps run against this object in a fixed order that
/// the three parties share.
class Session {
 public:
  using Links = std::array<std::shared_ptr<net::Link>, 3>;  // by Role P0, P1, Helper

  Session(Role self, SessionId id, Links links, const PairSeeds& seeds,
          net::Timeout timeout = std::chrono::milliseconds(120000));
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  Role role() const { return self_; }
  Party party() const;
  bool is_helper() const { return self_ == Role::Helper; }
  const SessionId& id() const { return id_; }
  Role peer() const;

  RandomStream& stream_with(Role other);

  void send(Role to, net::MessageType type, std::span<const u64> words);
  void send_bytes(Role to, net::MessageType type, std::vector<std::uint8_t> payload);
  std::vector<u64> recv(Role from, net::MessageType expected, std::size_t expected_words);
  net::Frame recv_frame(Role from, net::MessageType expected);

  /// One proxy<->proxy round: send our masked words, receive the peer's.
  std::vector<u64> exchange(std::span<const u64> mine);

  SessionMeter& meter() { return meter_; }
  const SessionMeter& meter() const { return meter_; }

  /// Best-effort ABORT to every connected party; never throws.
  void abort(std::string_view reason) noexcept;

  /// Drops this session's frames still queued on our links.
  void retire() noexcept;

  /// Test hook: sees every frame this party receives in the session.
  void on_receive(std::function<void(Role, const net::Frame&)> tap) { tap_ = std::move(tap); }

  class Phase {
   public:
    Phase(Session& s, std::string name) : s_(s), name_(std::move(name)), start_(net::Clock::now()) {}
    ~Phase();

   private:
    Session& s_;
    std::string name_;
    net::Clock::time_point start_;
  };

 private:
  net::Link& link(Role to);

  Role self_;
  SessionId id_;
  Links links_;
  net::Timeout timeout_;
  std::array<std::unique_ptr<RandomStream>, 3> streams_;
  SessionMeter meter_;
  std::function<void(Role, const net::Frame&)> tap_;
  bool aborted_ = false;
};

}  // namespace pprl::mpc
