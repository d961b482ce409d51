#pragma once

#include <functional>
#include <memory>
#include <span>

#include "pprl/mpc/session.hpp"
#include "pprl/net/transport.hpp"
#include "pprl/protocol.hpp"

namespace pprl {

/// The three computing parties as threads of one process, connected by
/// in-memory links (optionally shaped). Sessions on one cluster may run
/// concurrently.
class LocalCluster {
 public:
  explicit LocalCluster(mpc::PairSeeds seeds, const net::NetPreset& preset = net::net_preset("off"));
  ~LocalCluster();

  using PartyFn = std::function<void(mpc::Session&)>;

  struct Meters {
    mpc::SessionMeter p0, p1, helper;
  };

  /// Runs one session: each function gets its party's Session. If any party
  /// throws, the others are aborted and the first original error is
  /// rethrown.
  Meters run(PartyFn p0, PartyFn p1, PartyFn helper, const SessionId& id = random_session_id());

  /// Observes every frame the helper receives.
  void on_helper_receive(std::function<void(Role, const net::Frame&)> tap) { helper_tap_ = std::move(tap); }

  struct Outcome {
    protocol::MatchResult result;
    protocol::ResultShares p0, p1;
    Meters meters;
  };

  /// Full linkage session: shares the query and the database with `sharing`,
  /// runs all three parties and reveals the result.
  Outcome query(const EncodedRecord& query, const protocol::SharedDatabase& db0,
                const protocol::SharedDatabase& db1, const LinkageConfig& config, RandomStream& sharing);

  static std::pair<protocol::SharedDatabase, protocol::SharedDatabase> share_database(
      std::span<const EncodedRecord> db, RandomStream& sharing);

  void set_timeout(net::Timeout t) { timeout_ = t; }

 private:
  mpc::PairSeeds seeds_;
  std::array<mpc::Session::Links, 3> links_;  // by own role, then by peer role
  std::function<void(Role, const net::Frame&)> helper_tap_;
  net::Timeout timeout_ = std::chrono::milliseconds(120000);
};

}  // namespace pprl
