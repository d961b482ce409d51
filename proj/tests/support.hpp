#pragma once

#include <functional>
#include <vector>

#include "pprl/cluster.hpp"
#include "pprl/mpc/primitives.hpp"

namespace pprl::test {

inline std::pair<ShareVector, ShareVector> share(const std::vector<u64>& v, RandomStream& rng) {
  return share_vector(v, rng);
}

/// Runs a binary proxy primitive on plaintext inputs and returns the opened
/// output.
template <typename ProxyOp, typename HelperOp>
std::vector<u64> run_binary(LocalCluster& c, const std::vector<u64>& x, const std::vector<u64>& y, ProxyOp op,
                            HelperOp hop, LocalCluster::Meters* meters = nullptr) {
  RandomStream rng(random_seed());
  auto [x0, x1] = share(x, rng);
  auto [y0, y1] = share(y, rng);
  ShareVector z0, z1;
  const auto m = c.run([&](mpc::Session& s) { z0 = op(s, x0, y0); }, [&](mpc::Session& s) { z1 = op(s, x1, y1); },
                       [&](mpc::Session& s) { hop(s, x.size()); });
  if (meters) *meters = m;
  return reconstruct(z0, z1);
}

inline std::vector<u64> run_multiply(LocalCluster& c, const std::vector<u64>& x, const std::vector<u64>& y,
                                     LocalCluster::Meters* meters = nullptr) {
  return run_binary(
      c, x, y, [](mpc::Session& s, const ShareVector& a, const ShareVector& b) { return mpc::multiply(s, a, b); },
      [](mpc::Session& s, std::size_t n) { mpc::helper::multiply(s, n); }, meters);
}

inline std::vector<u64> run_compare(LocalCluster& c, const std::vector<u64>& x, const std::vector<u64>& y) {
  return run_binary(
      c, x, y, [](mpc::Session& s, const ShareVector& a, const ShareVector& b) { return mpc::compare_geq(s, a, b); },
      [](mpc::Session& s, std::size_t n) { mpc::helper::compare_geq(s, n); });
}

inline std::vector<u64> run_equals(LocalCluster& c, const std::vector<u64>& x, const std::vector<u64>& y) {
  return run_binary(
      c, x, y, [](mpc::Session& s, const ShareVector& a, const ShareVector& b) { return mpc::equals(s, a, b); },
      [](mpc::Session& s, std::size_t n) { mpc::helper::equals(s, n); });
}

inline LocalCluster fresh_cluster() { return LocalCluster(mpc::PairSeeds::from_master(random_seed())); }

}  // namespace pprl::test
