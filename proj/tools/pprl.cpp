// pprl: synthesize data, run the three parties, upload, query, evaluate, bench.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pprl/bench.hpp"
#include "pprl/client.hpp"
#include "pprl/evaluate.hpp"
#include "pprl/process.hpp"
#include "pprl/server.hpp"
#include "pprl/synth.hpp"

using namespace pprl;
namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kRuntime = 1, kInvalid = 2 };

struct Common {
  std::string config;
  std::string seed;
  std::string disclosure;
  std::string preset;
  std::string out;
};

AppConfig load_app(const Common& c) {
  AppConfig app;
  if (!c.config.empty())
    app = load_config(c.config);
  else
    app.linkage = default_linkage_config();
  if (!c.seed.empty()) app.seeds = mpc::PairSeeds::from_master(parse_seed_hex(c.seed));
  if (!c.disclosure.empty()) app.linkage.disclosure = parse_disclosure(c.disclosure);
  if (!c.preset.empty()) app.preset = net::net_preset(c.preset);
  validate_config(app.linkage);
  return app;
}

std::uint64_t seed_u64(const std::string& hex, std::uint64_t fallback) {
  if (hex.empty()) return fallback;
  std::size_t used = 0;
  const auto v = std::stoull(hex, &used, 16);
  if (used != hex.size()) throw ConfigError("seed must be hexadecimal: " + hex);
  return v;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size()) throw ConfigError("not a number: " + item);
  }
  return out;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 60; i <= 85; ++i) t.push_back(i / 100.0);
  return t;
}

std::vector<EncodedRecord> encode_all(const std::vector<RawRecord>& rows) {
  std::vector<EncodedRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      out.push_back(encode_record(rows[i]));
    } catch (const EncodingError& e) {
      throw EncodingError("row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

std::string format_result(std::size_t row, const protocol::MatchResult& r, Disclosure d) {
  std::ostringstream s;
  s << row << ',' << (r.matched ? "yes" : "no");
  if (d == Disclosure::Bit) return s.str();
  s << ',';
  if (r.matched) s << r.index;
  if (d == Disclosure::Full) {
    s << ',';
    if (r.score) s << std::setprecision(6) << r.score->value();
  }
  return s.str();
}

// --- synth ---

struct SynthArgs {
  synth::SyntheticDatasetSpec spec;
};

int cmd_synth(const Common& c, const SynthArgs& a) {
  auto spec = a.spec;
  spec.seed = seed_u64(c.seed, spec.seed);
  synth::validate(spec);
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  const auto data = synth::synthesize(spec);
  synth::write_records(dir / "a.csv", data.a);
  synth::write_records(dir / "b.csv", data.b);
  synth::write_truth(dir / "truth.csv", data.truth);
  std::cout << "wrote " << data.a.size() << " + " << data.b.size() << " records, " << data.truth.size()
            << " shared, to " << dir.string() << "\n";
  return kOk;
}

// --- party ---

struct PartyArgs {
  std::string role;
  std::string listen;
  std::vector<std::string> peers;
};

int cmd_party(const Common& c, const PartyArgs& a) {
  const Role role = parse_role(a.role);
  if (!is_party(role)) throw ConfigError("role must be p0, p1 or helper");
  AppConfig app = load_app(c);
  for (const auto& p : a.peers) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw ConfigError("peer must look like p0=host:port: " + p);
    const Role r = parse_role(p.substr(0, eq));
    const auto ep = net::parse_endpoint(p.substr(eq + 1));
    if (r == Role::P0)
      app.p0 = ep;
    else if (r == Role::P1)
      app.p1 = ep;
    else
      throw ConfigError("peers are p0 or p1: " + p);
  }
  net::Endpoint listen;
  if (!a.listen.empty())
    listen = net::parse_endpoint(a.listen);
  else if (role == Role::P0 && app.p0)
    listen = *app.p0;
  else if (role == Role::P1 && app.p1)
    listen = *app.p1;
  else if (role == Role::Helper && app.helper)
    listen = *app.helper;
  else if (role != Role::Helper)
    throw ConfigError("no listen address for " + a.role);

  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);
  std::signal(SIGPIPE, SIG_IGN);

  PartyServer server(role, app, listen);
  server.start();
  std::cerr << to_string(role) << " up";
  if (server.port() != 0) std::cerr << " on port " << server.port();
  std::cerr << ", preset " << app.preset.name << std::endl;

  int sig = 0;
  sigwait(&sigs, &sig);
  server.stop();
  std::cerr << to_string(role) << " stopped: " << server.sessions_completed() << " sessions, "
            << server.sessions_failed() << " failed" << std::endl;
  return kOk;
}

// --- upload / query ---

struct UploadArgs {
  std::string records;
  std::uint64_t owner = 1;
};

int cmd_upload(const Common& c, const UploadArgs& a) {
  const AppConfig app = load_app(c);
  const auto db = encode_all(synth::read_records(fs::path(a.records)));
  const auto receipt = upload_records(app, db, a.owner);
  std::cout << "uploaded " << db.size() << " records as owner " << a.owner << "; proxies hold " << receipt.db_size
            << " records\n";
  return kOk;
}

struct QueryArgs {
  std::string records;
  std::optional<std::size_t> row;
};

int cmd_query(const Common& c, const QueryArgs& a) {
  const AppConfig app = load_app(c);
  const auto rows = synth::read_records(fs::path(a.records));
  std::vector<std::size_t> which;
  if (a.row) {
    if (*a.row >= rows.size()) throw ConfigError("row " + std::to_string(*a.row) + " out of range");
    which.push_back(*a.row);
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) which.push_back(i);
  }
  std::ofstream file;
  std::ostream& out = output(c.out, file);
  const Disclosure d = app.linkage.disclosure;
  out << "query,matched" << (d != Disclosure::Bit ? ",index" : "") << (d == Disclosure::Full ? ",score" : "") << "\n";
  for (std::size_t i : which) {
    const auto q = query_record(app, encode_record(rows[i]));
    out << format_result(i, q.result, d) << "\n";
  }
  return kOk;
}

// --- evaluate ---

struct EvalArgs {
  std::string a, b, truth;
  std::string thresholds;
  std::string engine = "plain";
};

int cmd_evaluate(const Common& c, const EvalArgs& a) {
  const AppConfig app = load_app(c);
  const auto queries = encode_all(synth::read_records(fs::path(a.a)));
  const auto db = encode_all(synth::read_records(fs::path(a.b)));
  const auto truth = synth::read_truth(a.truth);
  const auto thresholds = a.thresholds.empty() ? default_thresholds() : parse_list(a.thresholds);
  std::vector<eval::QueryBest> best;
  if (a.engine == "plain")
    best = eval::best_matches(queries, db, app.linkage);
  else if (a.engine == "mpc")
    best = eval::secure_best_matches(queries, db, app.linkage);
  else
    throw ConfigError("engine must be plain or mpc");
  const auto cp = eval::counterparts(queries.size(), truth);
  const auto report = eval::evaluate(best, cp, thresholds);

  std::ofstream file;
  std::ostream& out = output(c.out, file);
  out << "tau,fp,fn,total\n";
  for (const auto& r : report.rows) out << r.tau << ',' << r.fp << ',' << r.fn << ',' << r.total() << "\n";
  std::cerr << "queries " << report.queries << " (" << report.with_counterpart << " with counterpart)\n"
            << "best tau " << report.best.tau << ": fp " << report.best.fp << ", fn " << report.best.fn
            << ", total " << report.best.total() << "\n"
            << "roc auc " << std::setprecision(5) << report.auc << "\n";
  return kOk;
}

// --- bench ---

struct BenchArgs {
  std::string sizes = "1,10,25,100,250,1000";
  std::string engine = "tcp";
};

int cmd_bench(const Common& c, const BenchArgs& a) {
  bench::BenchOptions opt;
  Common without_seed = c;
  without_seed.seed.clear();  // here it seeds the workload, not the parties
  const AppConfig app = load_app(without_seed);
  opt.linkage = app.linkage;
  opt.preset = c.preset.empty() ? app.preset.name : c.preset;
  opt.engine = bench::parse_engine(a.engine);
  opt.seed = seed_u64(c.seed, 1);
  opt.pprl_exe = self_exe();
  opt.sizes.clear();
  for (double s : parse_list(a.sizes)) {
    if (s < 1 || s != static_cast<double>(static_cast<std::size_t>(s))) throw ConfigError("sizes must be positive integers");
    opt.sizes.push_back(static_cast<std::size_t>(s));
  }
  const auto rows = bench::run(opt);

  std::ofstream file;
  std::ostream& out = output(c.out, file);
  out << "size,seconds,mb,peer_rounds,helper_rounds,status\n";
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    out << r.size << ',' << std::fixed << std::setprecision(3) << r.seconds << ',' << r.bytes / 1e6 << ','
        << std::defaultfloat << r.peer_rounds << ',' << r.helper_rounds << ',' << (r.ok ? "ok" : r.error) << "\n";
    if (r.ok) {
      xs.push_back(static_cast<double>(r.size));
      ys.push_back(static_cast<double>(r.bytes));
    }
  }
  if (xs.size() >= 2) {
    const auto fit = bench::linear_fit(xs, ys);
    std::cerr << "bytes ~ " << std::fixed << std::setprecision(0) << fit.slope << " * size + " << fit.intercept
              << ", r2 " << std::setprecision(5) << fit.r2 << "\n";
  }
  const bool all_ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.ok; });
  return all_ok ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving record linkage with two proxies and a helper"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file");
    sub->add_option("--seed", common.seed, "seed in hex");
    sub->add_option("--disclosure", common.disclosure, "bit, index or full");
    sub->add_option("--net-preset", common.preset, "a, b, c or off");
    sub->add_option("--out", common.out, "output file or directory");
  };

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate two overlapping record sets and their ground truth");
  add_common(synth);
  synth->add_option("--records", synth_args.spec.records, "records per set");
  synth->add_option("--overlap", synth_args.spec.overlap, "fraction of shared entities");
  synth->add_option("--corruption", synth_args.spec.corruption, "per-attribute corruption probability");
  synth->add_option("--max-errors", synth_args.spec.max_errors, "corruptions per record");
  synth->add_option("--omission", synth_args.spec.birth_name_omission, "birth-name omission rate");
  synth->add_option("--shuffle", synth_args.spec.shuffle_rate, "attribute-group shuffle rate");

  PartyArgs party_args;
  auto* party = app.add_subcommand("party", "run P0, P1 or the helper until SIGINT/SIGTERM");
  add_common(party);
  party->add_option("--role", party_args.role, "p0, p1 or helper")->required();
  party->add_option("--listen", party_args.listen, "host:port to listen on");
  party->add_option("--peers", party_args.peers, "p0=host:port, p1=host:port")->delimiter(',');

  UploadArgs upload_args;
  auto* upload = app.add_subcommand("upload", "share a record file and upload it to both proxies");
  add_common(upload);
  upload->add_option("--records", upload_args.records, "record file")->required()->check(CLI::ExistingFile);
  upload->add_option("--owner", upload_args.owner, "data owner id; a new upload replaces the old one");

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "link query records against the uploaded database");
  add_common(query);
  query->add_option("--records", query_args.records, "record file")->required()->check(CLI::ExistingFile);
  query->add_option("--row", query_args.row, "query only this row (0-based)");

  EvalArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "FP/FN per threshold and ROC AUC");
  add_common(evaluate);
  evaluate->add_option("--a", eval_args.a, "query records")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--b", eval_args.b, "database records")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--truth", eval_args.truth, "ground truth")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--thresholds", eval_args.thresholds, "comma-separated, default 0.60..0.85");
  evaluate->add_option("--engine", eval_args.engine, "plain or mpc");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "runtime and communication per database size");
  add_common(bench);
  bench->add_option("--sizes", bench_args.sizes, "comma-separated database sizes");
  bench->add_option("--engine", bench_args.engine, "memory, tcp or processes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(common, synth_args);
    if (*party) return cmd_party(common, party_args);
    if (*upload) return cmd_upload(common, upload_args);
    if (*query) return cmd_query(common, query_args);
    if (*evaluate) return cmd_evaluate(common, eval_args);
    if (*bench) return cmd_bench(common, bench_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const EncodingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
