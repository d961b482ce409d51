#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pprl/linkage.hpp"

namespace pprl::synth {

struct SyntheticDatasetSpec {
  std::size_t records = 1000;  // per set
  double overlap = 0.6;        // fraction of each set with a counterpart in the other
  double corruption = 0.10;    // per-attribute probability
  unsigned max_errors = 2;     // per record
  double birth_name_omission = 0.60;
  double shuffle_rate = 0.10;
  std::uint64_t seed = 1;
};

/// Throws ConfigError if a probability is outside [0, 1].
void validate(const SyntheticDatasetSpec& spec);

using Rng = std::mt19937_64;

/// Corruption operators; `Omit` blanks the attribute.
enum class Edit : std::uint8_t { Insert, Delete, Substitute, KeyboardSubstitute, PhoneticSwap, Omit };

struct CorruptionLog {
  std::vector<std::pair<std::string, Edit>> edits;  // attribute name, operator
};

/// Each attribute is hit with probability spec.corruption, at most
/// spec.max_errors times per record.
RawRecord corrupt_record(const RawRecord& r, Rng& rng, const SyntheticDatasetSpec& spec,
                         CorruptionLog* log = nullptr);

/// Single-edit helpers, exposed for tests.
std::string keyboard_neighbours(char c);
std::optional<std::string> phonetic_swap(const std::string& s, Rng& rng);
std::string apply_edit(const std::string& value, Edit e, bool numeric, Rng& rng);

/// Swaps the parts of one attribute group: first/last name, day/month, or
/// two adjacent postcode digits.
RawRecord shuffle_group(const RawRecord& r, Rng& rng);

RawRecord random_person(Rng& rng);

struct SyntheticData {
  std::vector<RawRecord> a, b;
  std::vector<std::pair<std::size_t, std::size_t>> truth;  // (row in a, row in b)
};

SyntheticData synthesize(const SyntheticDatasetSpec& spec);

// Record files: comma-separated with a header row, UTF-8, empty = missing.
inline constexpr std::array<std::string_view, 8> kColumns = {
    "first_name", "last_name", "birth_name", "city", "postcode", "birth_year", "birth_month", "birth_day"};

void write_records(std::ostream& out, const std::vector<RawRecord>& rows);
std::vector<RawRecord> read_records(std::istream& in);
void write_records(const std::filesystem::path& p, const std::vector<RawRecord>& rows);
std::vector<RawRecord> read_records(const std::filesystem::path& p);

void write_truth(const std::filesystem::path& p, const std::vector<std::pair<std::size_t, std::size_t>>& truth);
std::vector<std::pair<std::size_t, std::size_t>> read_truth(const std::filesystem::path& p);

/// Splits one CSV line (RFC 4180 quoting); exposed for tests.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace pprl::synth
