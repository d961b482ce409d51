#include "pprl/protocol.hpp"

#include <bit>
#include <numeric>

#include "pprl/mpc/primitives.hpp"

namespace pprl::protocol {

namespace {

constexpr std::array<std::size_t, 2> kMapSegments = {kBigramCount, kBigramCount};

// Batch shapes of the similarity phase, per database record.
constexpr std::size_t kDeltaProducts = kFieldCount + 1;   // six delta products and d_N * d_C
constexpr std::size_t kEqualities = kExactFieldCount + 1; // exact fields and the zero test of U
constexpr std::size_t kTermProducts = 2 + kExactFieldCount + 1;
constexpr std::size_t kScaleProducts = 3;

ShareVector public_vector(Party p, std::size_t n, u64 value) {
  ShareVector v(p, n);
  if (p == Party::P0) std::fill(v.values.begin(), v.values.end(), value);
  return v;
}

u64 micros(std::chrono::microseconds us) { return static_cast<u64>(us.count()); }

}  // namespace

std::vector<u64> record_words(const EncodedRecord& r) {
  std::vector<u64> w(kRecordWords, 0);
  for (int i = 0; i < kBigramCount; ++i) {
    w[kNameMapOffset + i] = r.name.bits[i];
    w[kCityMapOffset + i] = r.city.bits[i];
  }
  w[kCardNameOffset] = r.name.cardinality;
  w[kCardCityOffset] = r.city.cardinality;
  for (std::size_t f = 0; f < kFieldCount; ++f) w[kDeltaOffset + f] = r.delta[f];
  for (std::size_t e = 0; e < kExactFieldCount; ++e) w[kExactOffset + e] = r.exact[e];
  return w;
}

namespace {

BigramMap map_from_words(std::span<const u64> bits, u64 cardinality, const char* field) {
  BigramMap m;
  for (int i = 0; i < kBigramCount; ++i) {
    if (bits[i] > 1) throw EncodingError(std::string(field) + " map holds a non-binary flag");
    m.bits[i] = bits[i] == 1;
  }
  m.cardinality = static_cast<unsigned>(m.bits.count());
  if (m.cardinality != cardinality)
    throw EncodingError(std::string(field) + " cardinality " + std::to_string(cardinality) + " does not match " +
                        std::to_string(m.cardinality) + " set flags");
  if (m.cardinality < 1 || m.cardinality > kMaxBigrams)
    throw EncodingError(std::string(field) + " cardinality out of range");
  return m;
}

}  // namespace

EncodedRecord record_from_words(std::span<const u64> w) {
  if (w.size() != kRecordWords)
    throw EncodingError("record has " + std::to_string(w.size()) + " words, expected " +
                        std::to_string(kRecordWords));
  EncodedRecord r;
  r.name = map_from_words(w.subspan(kNameMapOffset, kBigramCount), w[kCardNameOffset], "name");
  r.city = map_from_words(w.subspan(kCityMapOffset, kBigramCount), w[kCardCityOffset], "city");
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    const u64 d = w[kDeltaOffset + f];
    const bool ok = f == field_index(Field::Name) ? d <= 3 : (d == 0 || d == 3);
    if (!ok) throw EncodingError("delta of " + std::string(kFieldNames[f]) + " out of range");
    r.delta[f] = static_cast<std::uint8_t>(d);
  }
  for (std::size_t e = 0; e < kExactFieldCount; ++e) {
    const u64 v = w[kExactOffset + e];
    if (v >= (u64{1} << 32))
      throw EncodingError(std::string(kFieldNames[kFuzzyFieldCount + e]) + " value exceeds 32 bits");
    r.exact[e] = v;
  }
  return r;
}

std::pair<SharedRecord, SharedRecord> outsource_record(const EncodedRecord& r, RandomStream& rng) {
  const auto words = record_words(r);
  auto [s0, s1] = share_vector(words, rng);
  return {SharedRecord{Party::P0, std::move(s0.values)}, SharedRecord{Party::P1, std::move(s1.values)}};
}

EncodedRecord reconstruct_record(const SharedRecord& a, const SharedRecord& b) {
  const auto plain = reconstruct(ShareVector(a.party, a.words), ShareVector(b.party, b.words));
  return record_from_words(plain);
}

SharedDatabase::SharedDatabase(Party party, std::vector<u64> words) : party_(party), words_(std::move(words)) {
  if (words_.size() % kRecordWords != 0)
    throw StructuralError("database share is not a whole number of records");
}

void SharedDatabase::append(const SharedRecord& r) {
  if (r.party != party_) throw StructuralError("record share belongs to the other proxy");
  if (r.words.size() != kRecordWords) throw StructuralError("record share has the wrong length");
  words_.insert(words_.end(), r.words.begin(), r.words.end());
}

// ------------------------------------------------------------ similarity phase

SharedScores comp_record_similarities(mpc::Session& s, const SharedRecord& query, const SharedDatabase& db,
                                      const LinkageConfig& config) {
  const Party p = s.party();
  if (query.party != p || db.party() != p) throw StructuralError("query or database share of the other proxy");
  if (query.words.size() != kRecordWords) throw StructuralError("query share has the wrong length");
  const std::size_t m = db.size();
  if (m == 0) throw StructuralError("empty database");
  const auto& q = query.words;
  const auto& w = config.weights;

  // Bigram intersections of both fuzzy fields, one round for all records.
  std::vector<std::span<const u64>> rows(m);
  for (std::size_t j = 0; j < m; ++j) rows[j] = db.row(j).first(kMapWords);
  const ShareVector inter = mpc::dot_products(s, std::span(q).first(kMapWords), rows, kMapSegments);

  std::vector<u64> n_name(m), n_city(m), d_name(m), d_city(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto r = db.row(j);
    n_name[j] = 2 * inter.values[2 * j];
    n_city[j] = 2 * inter.values[2 * j + 1];
    d_name[j] = q[kCardNameOffset] + r[kCardNameOffset];
    d_city[j] = q[kCardCityOffset] + r[kCardCityOffset];
  }

  // Delta products and d_N * d_C.
  ShareVector x(p, kDeltaProducts * m), y(p, kDeltaProducts * m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto r = db.row(j);
    for (std::size_t f = 0; f < kFieldCount; ++f) {
      x.values[f * m + j] = q[kDeltaOffset + f];
      y.values[f * m + j] = r[kDeltaOffset + f];
    }
    x.values[kFieldCount * m + j] = d_name[j];
    y.values[kFieldCount * m + j] = d_city[j];
  }
  const ShareVector delta = mpc::multiply(s, x, y);
  auto delta_of = [&](std::size_t f, std::size_t j) { return delta.values[f * m + j]; };
  auto dndc = [&](std::size_t j) { return delta.values[kFieldCount * m + j]; };

  std::vector<u64> total(m);
  for (std::size_t j = 0; j < m; ++j) {
    u64 u = 0;
    for (std::size_t f = 0; f < kFieldCount; ++f) u += w[f] * delta_of(f, j);
    total[j] = u;
  }

  // Exact-field equalities and the zero test of the weight total.
  ShareVector lhs(p, kEqualities * m), rhs(p, kEqualities * m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto r = db.row(j);
    for (std::size_t e = 0; e < kExactFieldCount; ++e) {
      lhs.values[e * m + j] = q[kExactOffset + e];
      rhs.values[e * m + j] = r[kExactOffset + e];
    }
    lhs.values[kExactFieldCount * m + j] = total[j];
  }
  const ShareVector eq = mpc::equals(s, lhs, rhs);

  // Weighted terms and the main denominator.
  ShareVector tx(p, kTermProducts * m), ty(p, kTermProducts * m);
  for (std::size_t j = 0; j < m; ++j) {
    tx.values[0 * m + j] = delta_of(field_index(Field::Name), j);
    ty.values[0 * m + j] = n_name[j];
    tx.values[1 * m + j] = delta_of(field_index(Field::City), j);
    ty.values[1 * m + j] = n_city[j];
    for (std::size_t e = 0; e < kExactFieldCount; ++e) {
      tx.values[(2 + e) * m + j] = delta_of(kFuzzyFieldCount + e, j);
      ty.values[(2 + e) * m + j] = eq.values[e * m + j];
    }
    tx.values[6 * m + j] = total[j];
    ty.values[6 * m + j] = dndc(j);
  }
  const ShareVector terms = mpc::multiply(s, tx, ty);

  // Cross-scale the fuzzy terms and the exact sum to the common denominator.
  ShareVector sx(p, kScaleProducts * m), sy(p, kScaleProducts * m);
  for (std::size_t j = 0; j < m; ++j) {
    u64 exact = 0;
    for (std::size_t e = 0; e < kExactFieldCount; ++e)
      exact += w[kFuzzyFieldCount + e] * terms.values[(2 + e) * m + j];
    sx.values[0 * m + j] = terms.values[0 * m + j];
    sy.values[0 * m + j] = d_city[j];
    sx.values[1 * m + j] = terms.values[1 * m + j];
    sy.values[1 * m + j] = d_name[j];
    sx.values[2 * m + j] = exact;
    sy.values[2 * m + j] = dndc(j);
  }
  const ShareVector scaled = mpc::multiply(s, sx, sy);

  SharedScores out{ShareVector(p, m), ShareVector(p, m), ShareVector(p, m)};
  const u64 w_name = w[field_index(Field::Name)];
  const u64 w_city = w[field_index(Field::City)];
  for (std::size_t j = 0; j < m; ++j) {
    out.n.values[j] = w_name * scaled.values[j] + w_city * scaled.values[m + j] + scaled.values[2 * m + j];
    // An all-zero weight total gives 0/0; the zero test turns it into 0/1.
    out.d.values[j] = terms.values[6 * m + j] + eq.values[kExactFieldCount * m + j];
    out.index.values[j] = p == Party::P0 ? j : 0;
  }
  return out;
}

// ----------------------------------------------------------------- tournament

unsigned tournament_levels(std::size_t m) {
  unsigned levels = 0;
  for (std::size_t k = m; k > 1; k = (k + 1) / 2) ++levels;
  return levels;
}

SharedScores compute_max_scores(mpc::Session& s, SharedScores scores) {
  if (scores.size() == 0) throw StructuralError("no scores to compare");
  const Party p = s.party();
  while (scores.size() > 1) {
    const std::size_t k = scores.size();
    const std::size_t pairs = k / 2;

    ShareVector x(p, 2 * pairs), y(p, 2 * pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
      x.values[i] = scores.n.values[2 * i];
      y.values[i] = scores.d.values[2 * i + 1];
      x.values[pairs + i] = scores.n.values[2 * i + 1];
      y.values[pairs + i] = scores.d.values[2 * i];
    }
    const ShareVector cross = mpc::multiply(s, x, y);
    ShareVector left(p, pairs), right(p, pairs);
    std::copy_n(cross.values.begin(), pairs, left.values.begin());
    std::copy_n(cross.values.begin() + pairs, pairs, right.values.begin());
    const ShareVector left_wins = mpc::compare_geq(s, left, right);

    ShareVector a(p, 3 * pairs), b(p, 3 * pairs), c(p, 3 * pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
      const std::array<const ShareVector*, 3> fields = {&scores.n, &scores.d, &scores.index};
      for (std::size_t f = 0; f < 3; ++f) {
        a.values[f * pairs + i] = fields[f]->values[2 * i];
        b.values[f * pairs + i] = fields[f]->values[2 * i + 1];
        c.values[f * pairs + i] = left_wins.values[i];
      }
    }
    const ShareVector winner = mpc::multiplex(s, a, b, c);

    const std::size_t next_size = pairs + k % 2;
    SharedScores next{ShareVector(p, next_size), ShareVector(p, next_size), ShareVector(p, next_size)};
    for (std::size_t i = 0; i < pairs; ++i) {
      next.n.values[i] = winner.values[i];
      next.d.values[i] = winner.values[pairs + i];
      next.index.values[i] = winner.values[2 * pairs + i];
    }
    if (k % 2) {
      next.n.values[pairs] = scores.n.values[k - 1];
      next.d.values[pairs] = scores.d.values[k - 1];
      next.index.values[pairs] = scores.index.values[k - 1];
    }
    scores = std::move(next);
  }
  return scores;
}

// ------------------------------------------------------------------ threshold

MatchShares get_matches(mpc::Session& s, const SharedScores& best, const LinkageConfig& config) {
  if (best.size() != 1) throw StructuralError("get_matches expects the single tournament winner");
  const Party p = s.party();
  const bool lead = p == Party::P0;

  ShareVector lhs(p, 1), rhs(p, 1);
  lhs.values[0] = best.n.values[0] * kThresholdScale;
  rhs.values[0] = config.tau_fixed * best.d.values[0] + (lead ? 1 : 0);
  const ShareVector eps = mpc::compare_geq(s, lhs, rhs);

  MatchShares out;
  out.matched = Share{p, eps.values[0]};
  out.index = Share{p, lead ? kSentinel : 0};
  out.n = Share{p, 0};
  out.d = Share{p, lead ? u64{1} : 0};

  if (config.disclosure == Disclosure::Index) {
    const ShareVector idx = mpc::multiplex(s, best.index, public_vector(p, 1, kSentinel), eps);
    out.index.value = idx.values[0];
  } else if (config.disclosure == Disclosure::Full) {
    ShareVector x(p, 3), y = public_vector(p, 3, 0), c(p, 3);
    x.values = {best.index.values[0], best.n.values[0], best.d.values[0]};
    if (lead) y.values = {kSentinel, 0, 1};
    c.values = {eps.values[0], eps.values[0], eps.values[0]};
    const ShareVector r = mpc::multiplex(s, x, y, c);
    out.index.value = r.values[0];
    out.n.value = r.values[1];
    out.d.value = r.values[2];
  }

  const u64 t = s.stream_with(s.peer()).next_word();
  out.tag = Share{p, lead ? kResultTag - t : t};
  return out;
}

// ------------------------------------------------------------------- sessions

MeterSummary MeterSummary::of(const mpc::Session& s) {
  const auto& m = s.meter();
  const auto peer = static_cast<std::size_t>(s.peer());
  const auto helper = static_cast<std::size_t>(Role::Helper);
  return MeterSummary{m.peer_rounds,
                      m.helper_rounds,
                      m.bytes_sent[peer],
                      m.bytes_sent[helper],
                      m.bytes_received[peer],
                      m.bytes_received[helper],
                      micros(m.phase("similarity")),
                      micros(m.phase("max")),
                      micros(m.phase("threshold"))};
}

std::vector<u64> encode_result(const ResultShares& r) {
  const auto& s = r.shares;
  const auto& m = r.meter;
  return {s.tag.value,     s.matched.value,    s.index.value,        s.n.value,
          s.d.value,       m.peer_rounds,      m.helper_rounds,      m.bytes_to_peer,
          m.bytes_to_helper, m.bytes_from_peer, m.bytes_from_helper, m.us_similarity,
          m.us_max,        m.us_threshold};
}

ResultShares decode_result(Party party, std::span<const u64> w) {
  if (w.size() != kResultWords)
    throw net::ProtocolError("RESULT carries " + std::to_string(w.size()) + " words, expected " +
                             std::to_string(kResultWords));
  ResultShares r;
  r.shares = MatchShares{{party, w[0]}, {party, w[1]}, {party, w[2]}, {party, w[3]}, {party, w[4]}};
  r.meter = MeterSummary{w[5], w[6], w[7], w[8], w[9], w[10], w[11], w[12], w[13]};
  return r;
}

MatchResult reveal_result(const ResultShares& a, const ResultShares& b, Disclosure disclosure) {
  const auto& x = a.shares;
  const auto& y = b.shares;
  if (x.tag.party == y.tag.party) throw net::ProtocolError("both result shares come from the same proxy");
  if (reconstruct(x.tag, y.tag) != kResultTag)
    throw net::ProtocolError("result shares do not reconstruct the session tag");
  const u64 matched = reconstruct(x.matched, y.matched);
  if (matched > 1) throw net::ProtocolError("matched bit reconstructs to " + std::to_string(matched));

  MatchResult r;
  r.matched = matched == 1;
  r.index = reconstruct(x.index, y.index);
  if (disclosure == Disclosure::Bit) {
    r.index = kSentinel;
  } else if ((r.index == kSentinel) == r.matched) {
    throw net::ProtocolError("index and matched bit disagree");
  }
  if (disclosure == Disclosure::Full && r.matched) r.score = ScoreFraction{reconstruct(x.n, y.n), reconstruct(x.d, y.d)};
  return r;
}

ResultShares run_proxy_session(mpc::Session& s, const SharedRecord& query, const SharedDatabase& db,
                               const LinkageConfig& config) {
  SharedScores scores = [&] {
    mpc::Session::Phase ph(s, "similarity");
    return comp_record_similarities(s, query, db, config);
  }();
  SharedScores best = [&] {
    mpc::Session::Phase ph(s, "max");
    return compute_max_scores(s, std::move(scores));
  }();
  MatchShares match = [&] {
    mpc::Session::Phase ph(s, "threshold");
    return get_matches(s, best, config);
  }();
  return ResultShares{match, MeterSummary::of(s)};
}

u64 expected_peer_rounds(std::size_t m, Disclosure disclosure) {
  const u64 similarity = 4 + mpc::kCompareRounds;
  const u64 per_level = 2 + mpc::kCompareRounds;
  return similarity + per_level * tournament_levels(m) + mpc::kCompareRounds +
         (disclosure == Disclosure::Bit ? 0 : 1);
}

u64 expected_helper_rounds(std::size_t m) { return 2 + tournament_levels(m); }

namespace helper {

void comp_record_similarities(mpc::Session& s, std::size_t m) {
  mpc::helper::dot_products(s, m, kMapSegments);
  mpc::helper::multiply(s, kDeltaProducts * m);
  mpc::helper::equals(s, kEqualities * m);
  mpc::helper::multiply(s, kTermProducts * m);
  mpc::helper::multiply(s, kScaleProducts * m);
}

void compute_max_scores(mpc::Session& s, std::size_t m) {
  for (std::size_t k = m; k > 1; k = (k + 1) / 2) {
    const std::size_t pairs = k / 2;
    mpc::helper::multiply(s, 2 * pairs);
    mpc::helper::compare_geq(s, pairs);
    mpc::helper::multiplex(s, 3 * pairs);
  }
}

void get_matches(mpc::Session& s, Disclosure disclosure) {
  mpc::helper::compare_geq(s, 1);
  if (disclosure == Disclosure::Index) mpc::helper::multiplex(s, 1);
  if (disclosure == Disclosure::Full) mpc::helper::multiplex(s, 3);
}

void run_helper_session(mpc::Session& s, std::size_t m, Disclosure disclosure) {
  if (m == 0) throw StructuralError("empty database");
  {
    mpc::Session::Phase ph(s, "similarity");
    comp_record_similarities(s, m);
  }
  {
    mpc::Session::Phase ph(s, "max");
    compute_max_scores(s, m);
  }
  mpc::Session::Phase ph(s, "threshold");
  get_matches(s, disclosure);
}

}  // namespace helper

}  // namespace pprl::protocol
