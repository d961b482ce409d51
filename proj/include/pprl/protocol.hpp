#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <span>
#include <vector>

#include "pprl/linkage.hpp"
#include "pprl/mpc/session.hpp"
#include "pprl/random_stream.hpp"
#include "pprl/ring.hpp"

namespace pprl::protocol {

// Word layout of one record as it travels to and lives on a proxy.
inline constexpr std::size_t kNameMapOffset = 0;
inline constexpr std::size_t kCityMapOffset = kBigramCount;
inline constexpr std::size_t kMapWords = 2 * kBigramCount;
inline constexpr std::size_t kCardNameOffset = kMapWords;
inline constexpr std::size_t kCardCityOffset = kMapWords + 1;
inline constexpr std::size_t kDeltaOffset = kMapWords + 2;
inline constexpr std::size_t kExactOffset = kDeltaOffset + kFieldCount;
inline constexpr std::size_t kRecordWords = kExactOffset + kExactFieldCount;

inline constexpr u64 kSentinel = ~u64{0};
inline constexpr u64 kResultTag = 0x4c52'5050'5441'4721ULL;

std::vector<u64> record_words(const EncodedRecord& r);

/// Inverse of record_words; throws EncodingError if the words are not a
/// valid encoding.
EncodedRecord record_from_words(std::span<const u64> words);

/// One proxy's share of a record.
struct SharedRecord {
  Party party = Party::P0;
  std::vector<u64> words;  // kRecordWords
};

std::pair<SharedRecord, SharedRecord> outsource_record(const EncodedRecord& r, RandomStream& rng);
EncodedRecord reconstruct_record(const SharedRecord& a, const SharedRecord& b);

/// One proxy's share of the whole database, records back to back.
class SharedDatabase {
 public:
  explicit SharedDatabase(Party party) : party_(party) {}
  SharedDatabase(Party party, std::vector<u64> words);

  Party party() const { return party_; }
  std::size_t size() const { return words_.size() / kRecordWords; }
  std::span<const u64> row(std::size_t j) const { return {words_.data() + j * kRecordWords, kRecordWords}; }
  const std::vector<u64>& words() const { return words_; }

  void append(const SharedRecord& r);

 private:
  Party party_;
  std::vector<u64> words_;
};

/// Shares of one score per database record, with the record's index.
struct SharedScores {
  ShareVector n;
  ShareVector d;
  ShareVector index;

  std::size_t size() const { return n.size(); }
};

SharedScores comp_record_similarities(mpc::Session& s, const SharedRecord& query, const SharedDatabase& db,
                                      const LinkageConfig& config);

/// Pairwise tournament; the left (lower index) entry wins ties.
SharedScores compute_max_scores(mpc::Session& s, SharedScores scores);

struct MatchShares {
  Share tag;
  Share matched;
  Share index;
  Share n;
  Share d;
};

MatchShares get_matches(mpc::Session& s, const SharedScores& best, const LinkageConfig& config);

/// Per-proxy accounting shipped in clear next to the shares.
struct MeterSummary {
  u64 peer_rounds = 0;
  u64 helper_rounds = 0;
  u64 bytes_to_peer = 0;
  u64 bytes_to_helper = 0;
  u64 bytes_from_peer = 0;
  u64 bytes_from_helper = 0;
  u64 us_similarity = 0;
  u64 us_max = 0;
  u64 us_threshold = 0;

  static MeterSummary of(const mpc::Session& s);
};

/// What a proxy sends to the query client as RESULT.
struct ResultShares {
  MatchShares shares;
  MeterSummary meter;
};

inline constexpr std::size_t kResultWords = 14;
std::vector<u64> encode_result(const ResultShares& r);
ResultShares decode_result(Party party, std::span<const u64> words);

struct MatchResult {
  bool matched = false;
  u64 index = kSentinel;
  std::optional<ScoreFraction> score;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Combines both proxies' result shares; throws net::ProtocolError if they do
/// not fit together.
MatchResult reveal_result(const ResultShares& p0, const ResultShares& p1, Disclosure disclosure);

/// Whole proxy side of one linkage session.
ResultShares run_proxy_session(mpc::Session& s, const SharedRecord& query, const SharedDatabase& db,
                               const LinkageConfig& config);

/// Number of proxy<->proxy and proxy->helper rounds of a session over m records.
u64 expected_peer_rounds(std::size_t m, Disclosure disclosure);
u64 expected_helper_rounds(std::size_t m);

unsigned tournament_levels(std::size_t m);

namespace helper {

void comp_record_similarities(mpc::Session& s, std::size_t m);
void compute_max_scores(mpc::Session& s, std::size_t m);
void get_matches(mpc::Session& s, Disclosure disclosure);

/// Whole helper side of one linkage session.
void run_helper_session(mpc::Session& s, std::size_t m, Disclosure disclosure);

}  // namespace helper

}  // namespace pprl::protocol
