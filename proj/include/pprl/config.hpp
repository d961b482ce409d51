#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pprl/linkage.hpp"
#include "pprl/mpc/session.hpp"
#include "pprl/net/frame.hpp"
#include "pprl/net/transport.hpp"

namespace pprl {

/// Everything a party or client reads from the JSON config file.
struct AppConfig {
  LinkageConfig linkage;
  mpc::PairSeeds seeds;
  std::optional<net::Endpoint> p0, p1, helper;
  net::NetPreset preset = net::net_preset("off");
};

/// Parses and validates; throws ConfigError naming what is wrong.
AppConfig parse_config(std::string_view json_text);
AppConfig load_config(const std::filesystem::path& path);

/// Serialises back to JSON (seeds included only if `with_seeds`).
std::string dump_config(const AppConfig& config, bool with_seeds);

/// Agreed by all parties in HELLO and CONFIG: weights, threshold and
/// disclosure mode. Seeds and endpoints are not part of it.
net::Digest config_digest(const LinkageConfig& config);

/// Default weights for the synthetic data's field statistics.
LinkageConfig default_linkage_config();

}  // namespace pprl
