#include "pprl/ring.hpp"

#include <bit>
#include <cstring>

#include "pprl/random_stream.hpp"

namespace pprl {

std::pair<Share, Share> share_value(RingElement secret, RandomStream& stream) {
  const RingElement r = stream.next_word();
  return {Share{Party::P0, r}, Share{Party::P1, secret - r}};
}

std::pair<ShareVector, ShareVector> share_vector(std::span<const RingElement> secrets,
                                                 RandomStream& stream) {
  ShareVector s0(Party::P0, stream.next(secrets.size()));
  ShareVector s1(Party::P1, secrets.size());
  for (std::size_t i = 0; i < secrets.size(); ++i) s1.values[i] = secrets[i] - s0.values[i];
  return {std::move(s0), std::move(s1)};
}

std::vector<RingElement> reconstruct(const ShareVector& s0, const ShareVector& s1) {
  if (s0.size() != s1.size())
    throw StructuralError("reconstruct: share vectors differ in length (" +
                          std::to_string(s0.size()) + " vs " + std::to_string(s1.size()) + ")");
  if (s0.party == s1.party) throw StructuralError("reconstruct: both shares belong to one party");
  std::vector<RingElement> out(s0.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s0.values[i] + s1.values[i];
  return out;
}

Share local_linear(std::span<const Share> shares, std::span<const RingElement> coeffs,
                   RingElement offset, Party party) {
  if (shares.size() != coeffs.size())
    throw StructuralError("local_linear: " + std::to_string(shares.size()) + " shares but " +
                          std::to_string(coeffs.size()) + " coefficients");
  RingElement acc = party == Party::P0 ? offset : 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (shares[i].party != party) throw StructuralError("local_linear: mixed party shares");
    acc += coeffs[i] * shares[i].value;
  }
  return Share{party, acc};
}

ShareVector local_scale_add(const ShareVector& shares, std::span<const RingElement> coeffs,
                            std::span<const RingElement> offsets) {
  if (coeffs.size() != shares.size() || offsets.size() != shares.size())
    throw StructuralError("local_scale_add: length mismatch");
  ShareVector out(shares.party, shares.size());
  const bool add_offset = shares.party == Party::P0;
  for (std::size_t i = 0; i < shares.size(); ++i)
    out.values[i] = coeffs[i] * shares.values[i] + (add_offset ? offsets[i] : 0);
  return out;
}

void append_le64(std::vector<std::uint8_t>& out, u64 v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

u64 load_le64(const std::uint8_t* p) {
  u64 v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::vector<std::uint8_t> to_bytes(std::span<const u64> words) {
  std::vector<std::uint8_t> out(words.size() * 8);
  if constexpr (std::endian::native == std::endian::little) {
    if (!words.empty()) std::memcpy(out.data(), words.data(), out.size());
  } else {
    for (std::size_t i = 0; i < words.size(); ++i)
      for (int b = 0; b < 8; ++b) out[8 * i + b] = static_cast<std::uint8_t>(words[i] >> (8 * b));
  }
  return out;
}

std::vector<u64> from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 8 != 0)
    throw StructuralError("payload of " + std::to_string(bytes.size()) +
                          " bytes is not a whole number of 64-bit words");
  std::vector<u64> out(bytes.size() / 8);
  if constexpr (std::endian::native == std::endian::little) {
    if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = load_le64(bytes.data() + 8 * i);
  }
  return out;
}

}  // namespace pprl
