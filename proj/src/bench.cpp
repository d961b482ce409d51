#include "pprl/bench.hpp"

#include <numeric>

#include "pprl/client.hpp"
#include "pprl/cluster.hpp"
#include "pprl/process.hpp"
#include "pprl/server.hpp"
#include "pprl/synth.hpp"

namespace pprl::bench {

Engine parse_engine(std::string_view s) {
  if (s == "memory") return Engine::Memory;
  if (s == "tcp") return Engine::Tcp;
  if (s == "processes") return Engine::Processes;
  throw ConfigError("unknown engine '" + std::string(s) + "' (memory, tcp or processes)");
}

std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::Memory: return "memory";
    case Engine::Tcp: return "tcp";
    case Engine::Processes: return "processes";
  }
  return "?";
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear fit needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

u64 session_bytes(const protocol::MeterSummary& p0, const protocol::MeterSummary& p1) {
  return p0.bytes_to_peer + p0.bytes_to_helper + p0.bytes_from_helper + p1.bytes_to_peer + p1.bytes_to_helper +
         p1.bytes_from_helper;
}

namespace {

struct Workload {
  std::vector<EncodedRecord> db;
  EncodedRecord query;
};

Workload make_workload(std::size_t max_size, std::uint64_t seed) {
  synth::SyntheticDatasetSpec spec;
  spec.records = std::max<std::size_t>(max_size, 2);
  spec.seed = seed;
  const auto data = synth::synthesize(spec);
  Workload w;
  for (const auto& r : data.b) w.db.push_back(encode_record(r));
  w.query = encode_record(data.a.front());
  return w;
}

BenchRow row_from(std::size_t m, const protocol::ResultShares& p0, const protocol::ResultShares& p1,
                  std::chrono::microseconds wall) {
  BenchRow r;
  r.size = m;
  r.seconds = static_cast<double>(wall.count()) / 1e6;
  r.bytes = session_bytes(p0.meter, p1.meter);
  r.peer_rounds = p0.meter.peer_rounds;
  r.helper_rounds = p0.meter.helper_rounds;
  r.ok = true;
  return r;
}

}  // namespace

std::vector<BenchRow> run(const BenchOptions& opt) {
  const std::size_t max_size = *std::max_element(opt.sizes.begin(), opt.sizes.end());
  const Workload w = make_workload(max_size, opt.seed);
  std::vector<BenchRow> rows;

  AppConfig app;
  app.linkage = opt.linkage;
  app.seeds = mpc::PairSeeds::from_master(random_seed());
  app.preset = net::net_preset(opt.preset);

  std::unique_ptr<LocalCluster> cluster;
  std::unique_ptr<PartyServer> s0, s1, sh;
  std::unique_ptr<ProcessMesh> mesh;
  switch (opt.engine) {
    case Engine::Memory:
      cluster = std::make_unique<LocalCluster>(app.seeds, app.preset);
      break;
    case Engine::Tcp:
      s0 = std::make_unique<PartyServer>(Role::P0, app, net::Endpoint{"127.0.0.1", 0});
      s0->start();
      app.p0 = net::Endpoint{"127.0.0.1", s0->port()};
      s1 = std::make_unique<PartyServer>(Role::P1, app, net::Endpoint{"127.0.0.1", 0});
      s1->start();
      app.p1 = net::Endpoint{"127.0.0.1", s1->port()};
      sh = std::make_unique<PartyServer>(Role::Helper, app, net::Endpoint{});
      sh->start();
      if (!s0->mesh_ready(std::chrono::seconds(20)) || !s1->mesh_ready(std::chrono::seconds(20)))
        throw std::runtime_error("party mesh did not come up");
      break;
    case Engine::Processes:
      mesh = std::make_unique<ProcessMesh>(opt.pprl_exe, app, opt.workdir);
      app = mesh->config();
      break;
  }

  RandomStream sharing(random_seed());
  for (std::size_t m : opt.sizes) {
    const std::span<const EncodedRecord> db(w.db.data(), m);
    try {
      if (cluster) {
        auto [d0, d1] = LocalCluster::share_database(db, sharing);
        const auto start = net::Clock::now();
        const auto out = cluster->query(w.query, d0, d1, app.linkage, sharing);
        rows.push_back(row_from(m, out.p0, out.p1,
                                std::chrono::duration_cast<std::chrono::microseconds>(net::Clock::now() - start)));
      } else {
        upload_records(app, db, 1);
        const auto out = query_record(app, w.query);
        rows.push_back(row_from(m, out.p0, out.p1, out.wall));
      }
    } catch (const std::exception& e) {
      BenchRow r;
      r.size = m;
      r.error = e.what();
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace pprl::bench
