#include "pprl/cluster.hpp"

#include <exception>
#include <optional>
#include <thread>

namespace pprl {

namespace {

std::size_t slot(Role r) { return static_cast<std::size_t>(r); }

}  // namespace

LocalCluster::LocalCluster(mpc::PairSeeds seeds, const net::NetPreset& preset) : seeds_(std::move(seeds)) {
  const std::array<std::pair<Role, Role>, 3> pairs = {
      {{Role::P0, Role::P1}, {Role::P0, Role::Helper}, {Role::P1, Role::Helper}}};
  for (auto [a, b] : pairs) {
    auto [la, lb] = net::make_memory_link_pair();
    links_[slot(a)][slot(b)] = net::maybe_shape(la, preset, a, b);
    links_[slot(b)][slot(a)] = net::maybe_shape(lb, preset, b, a);
  }
}

LocalCluster::~LocalCluster() {
  for (auto& row : links_)
    for (auto& l : row)
      if (l) l->close();
}

LocalCluster::Meters LocalCluster::run(PartyFn p0, PartyFn p1, PartyFn helper, const SessionId& id) {
  struct Slot {
    PartyFn fn;
    std::exception_ptr error;
    bool aborted_by_peer = false;
    mpc::SessionMeter meter;
  };
  std::array<Slot, 3> slots;
  slots[0].fn = std::move(p0);
  slots[1].fn = std::move(p1);
  slots[2].fn = std::move(helper);

  auto body = [&](Role role) {
    Slot& me = slots[slot(role)];
    std::optional<mpc::Session> opt;
    try {
      opt.emplace(role, id, links_[slot(role)], seeds_, timeout_);
    } catch (...) {
      me.error = std::current_exception();
      return;
    }
    mpc::Session& s = *opt;
    if (role == Role::Helper && helper_tap_) s.on_receive(helper_tap_);
    try {
      me.fn(s);
    } catch (const mpc::SessionAborted&) {
      me.error = std::current_exception();
      me.aborted_by_peer = true;
    } catch (const std::exception& e) {
      me.error = std::current_exception();
      s.abort(e.what());
    }
    me.meter = s.meter();
    s.retire();
  };

  std::thread t0(body, Role::P0), t1(body, Role::P1);
  body(Role::Helper);
  t0.join();
  t1.join();

  for (const auto& sl : slots)
    if (sl.error && !sl.aborted_by_peer) std::rethrow_exception(sl.error);
  for (const auto& sl : slots)
    if (sl.error) std::rethrow_exception(sl.error);
  return Meters{slots[0].meter, slots[1].meter, slots[2].meter};
}

std::pair<protocol::SharedDatabase, protocol::SharedDatabase> LocalCluster::share_database(
    std::span<const EncodedRecord> db, RandomStream& sharing) {
  protocol::SharedDatabase d0(Party::P0), d1(Party::P1);
  for (const auto& r : db) {
    auto [s0, s1] = protocol::outsource_record(r, sharing);
    d0.append(s0);
    d1.append(s1);
  }
  return {std::move(d0), std::move(d1)};
}

LocalCluster::Outcome LocalCluster::query(const EncodedRecord& query, const protocol::SharedDatabase& db0,
                                          const protocol::SharedDatabase& db1, const LinkageConfig& config,
                                          RandomStream& sharing) {
  auto [q0, q1] = protocol::outsource_record(query, sharing);
  Outcome out;
  const std::size_t m = db0.size();
  out.meters = run([&](mpc::Session& s) { out.p0 = protocol::run_proxy_session(s, q0, db0, config); },
                   [&](mpc::Session& s) { out.p1 = protocol::run_proxy_session(s, q1, db1, config); },
                   [&](mpc::Session& s) { protocol::helper::run_helper_session(s, m, config.disclosure); });
  out.result = protocol::reveal_result(out.p0, out.p1, config.disclosure);
  return out;
}

}  // namespace pprl
