#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pprl/ring.hpp"

namespace pprl {

// Alphabet: a..z, '-', '.', ' ', '*' (ordinals 0..29).
inline constexpr int kAlphabetSize = 30;
inline constexpr int kBigramCount = kAlphabetSize * kAlphabetSize;
inline constexpr unsigned kMaxBigrams = 63;
inline constexpr int kEmptyFieldBigram = (kAlphabetSize - 1) * kAlphabetSize + (kAlphabetSize - 1);

/// Ordinal of a normalized symbol, or -1 if outside the alphabet.
constexpr int symbol_ordinal(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  switch (c) {
    case '-': return 26;
    case '.': return 27;
    case ' ': return 28;
    case '*': return 29;
    default: return -1;
  }
}

constexpr int bigram_index(char first, char second) {
  return kAlphabetSize * symbol_ordinal(first) + symbol_ordinal(second);
}

// Field order is shared by the encoder, the wire layout and the weights.
enum class Field : std::uint8_t { Name = 0, City, Postcode, BirthYear, BirthMonth, BirthDay };
inline constexpr std::size_t kFieldCount = 6;
inline constexpr std::size_t kFuzzyFieldCount = 2;
inline constexpr std::size_t kExactFieldCount = 4;
inline constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "name", "city", "postcode", "birth_year", "birth_month", "birth_day"};

constexpr std::size_t field_index(Field f) { return static_cast<std::size_t>(f); }

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BigramMap {
  std::bitset<kBigramCount> bits;
  unsigned cardinality = 0;

  friend bool operator==(const BigramMap&, const BigramMap&) = default;
};

/// Record as read from a file; empty string means missing.
struct RawRecord {
  std::string first_name;
  std::string last_name;
  std::string birth_name;
  std::string city;
  std::string postcode;
  std::string birth_year;
  std::string birth_month;
  std::string birth_day;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

/// Completeness indicators are on a thirds scale: 3 means present. The
/// combined name gets one third per present name part.
struct EncodedRecord {
  BigramMap name;
  BigramMap city;
  std::array<std::uint8_t, kFieldCount> delta{};
  std::array<u64, kExactFieldCount> exact{};

  friend bool operator==(const EncodedRecord&, const EncodedRecord&) = default;
};

/// Similarity score n/d kept as a pair so no division is ever needed.
struct ScoreFraction {
  u64 n = 0;
  u64 d = 1;

  double value() const { return d == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(d); }
  friend bool operator==(const ScoreFraction&, const ScoreFraction&) = default;
};

/// a >= b by cross-multiplication. Both fractions must be under 2^30 so the
/// products stay below 2^60.
inline bool at_least(const ScoreFraction& a, const ScoreFraction& b) { return a.n * b.d >= b.n * a.d; }

enum class Disclosure : std::uint8_t { Bit = 0, Index = 1, Full = 2 };

std::string_view to_string(Disclosure d);
Disclosure parse_disclosure(std::string_view s);

inline constexpr u64 kWeightScale = 64;
inline constexpr u64 kThresholdScale = u64{1} << 16;
inline constexpr u64 kWeightBudget = 65536;  // sum of 9 * w_f
inline constexpr u64 kComparisonBound = u64{1} << 61;
inline constexpr u64 kScoreBound = u64{1} << 30;

struct LinkageConfig {
  std::array<u64, kFieldCount> weights{};
  u64 tau_fixed = 0;  // round(tau * 2^16)
  Disclosure disclosure = Disclosure::Index;

  double threshold() const { return static_cast<double>(tau_fixed) / kThresholdScale; }
  friend bool operator==(const LinkageConfig&, const LinkageConfig&) = default;
};

u64 threshold_to_fixed(double tau);

/// Throws ConfigError naming every violated constraint.
const LinkageConfig& validate_config(const LinkageConfig& config);

/// round(64 * log2((1 - error_rate) / frequency)), floored at 1.
u64 compute_field_weight(double frequency, double error_rate);

std::string normalize_text(std::string_view raw);
BigramMap build_bigram_map(std::string_view normalized);
EncodedRecord encode_record(const RawRecord& raw);

ScoreFraction dice_fraction(const BigramMap& x, const BigramMap& y);
inline bool exact_similarity(u64 x, u64 y) { return x == y; }

ScoreFraction record_score_fraction(const EncodedRecord& x, const EncodedRecord& y,
                                    const LinkageConfig& config);

/// Records every operand that reaches a comparison so callers can certify the
/// sign-test bound.
struct BoundTracker {
  u64 max_operand = 0;
  u64 max_numerator = 0;
  u64 max_denominator = 0;
  std::size_t comparisons = 0;

  void observe_score(const ScoreFraction& s);
  void observe_compare(u64 a, u64 b);
};

struct PlainMatch {
  std::size_t index = 0;
  ScoreFraction score;
  bool matched = false;
};

bool exceeds_threshold(const ScoreFraction& s, const LinkageConfig& config,
                       BoundTracker* tracker = nullptr);

/// Linear argmax; ties go to the lowest index.
PlainMatch best_match_plain(const EncodedRecord& query, std::span<const EncodedRecord> db,
                            const LinkageConfig& config);

/// Plaintext replay of the secure pairwise tournament (left wins ties),
/// reporting every cross product it compares.
std::size_t tournament_argmax(std::span<const ScoreFraction> scores, BoundTracker* tracker = nullptr);

}  // namespace pprl
