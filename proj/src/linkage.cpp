#include "pprl/linkage.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace pprl {

std::string_view to_string(Disclosure d) {
  switch (d) {
    case Disclosure::Bit: return "bit";
    case Disclosure::Index: return "index";
    case Disclosure::Full: return "full";
  }
  return "?";
}

Disclosure parse_disclosure(std::string_view s) {
  if (s == "bit") return Disclosure::Bit;
  if (s == "index") return Disclosure::Index;
  if (s == "full") return Disclosure::Full;
  throw ConfigError("unknown disclosure mode '" + std::string(s) + "' (expected bit, index or full)");
}

u64 threshold_to_fixed(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  return static_cast<u64>(std::llround(tau * static_cast<double>(kThresholdScale)));
}

const LinkageConfig& validate_config(const LinkageConfig& config) {
  std::string problems;
  auto complain = [&](const std::string& msg) {
    if (!problems.empty()) problems += "; ";
    problems += msg;
  };
  u64 budget = 0;
  for (std::size_t f = 0; f < kFieldCount; ++f) {
    if (config.weights[f] == 0)
      complain("weight for field '" + std::string(kFieldNames[f]) + "' is missing or zero");
    if (config.weights[f] > kWeightBudget) {
      complain("weight for field '" + std::string(kFieldNames[f]) + "' exceeds the budget");
      budget = kWeightBudget + 1;
    } else if (budget <= kWeightBudget) {
      budget += 9 * config.weights[f];
    }
  }
  if (budget > kWeightBudget)
    complain("weight budget exceeded: sum of 9*w_f must be <= " + std::to_string(kWeightBudget));
  if (config.tau_fixed == 0 || config.tau_fixed >= kThresholdScale)
    complain("threshold must lie strictly between 0 and 1 (fixed-point value " +
             std::to_string(config.tau_fixed) + ")");
  if (static_cast<unsigned>(config.disclosure) > 2) complain("unknown disclosure mode");
  if (!problems.empty()) throw ConfigError(problems);
  return config;
}

u64 compute_field_weight(double frequency, double error_rate) {
  if (!(frequency > 0.0 && frequency < 1.0))
    throw ConfigError("field frequency must lie in (0, 1)");
  if (!(error_rate >= 0.0 && error_rate < 1.0))
    throw ConfigError("field error rate must lie in [0, 1)");
  const double w = std::round(static_cast<double>(kWeightScale) * std::log2((1.0 - error_rate) / frequency));
  return w < 1.0 ? 1 : static_cast<u64>(w);
}

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Length of a UTF-8 sequence from its lead byte; 1 for stray bytes.
std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xF0 && lead < 0xF8) return 4;
  if (lead >= 0xE0) return 3;
  if (lead >= 0xC0) return 2;
  return 1;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  auto emit = [&](std::string_view s) {
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.append(s);
  };

  for (std::size_t i = 0; i < raw.size();) {
    const auto c = static_cast<unsigned char>(raw[i]);
    if (c < 0x80) {
      ++i;
      if (is_space(c)) {
        pending_space = true;
      } else if (c >= 'A' && c <= 'Z') {
        emit(std::string(1, static_cast<char>(c - 'A' + 'a')));
      } else if (symbol_ordinal(static_cast<char>(c)) >= 0) {
        emit(std::string(1, static_cast<char>(c)));
      } else {
        emit("*");
      }
      continue;
    }
    std::size_t len = std::min(utf8_length(c), raw.size() - i);
    if (len == 2 && c == 0xC3) {
      switch (static_cast<unsigned char>(raw[i + 1])) {
        case 0x84: case 0xA4: emit("ae"); break;
        case 0x96: case 0xB6: emit("oe"); break;
        case 0x9C: case 0xBC: emit("ue"); break;
        case 0x9F: emit("ss"); break;
        default: emit("*");
      }
    } else if (len == 3 && c == 0xE1 && static_cast<unsigned char>(raw[i + 1]) == 0xBA &&
               static_cast<unsigned char>(raw[i + 2]) == 0x9E) {
      emit("ss");  // capital sharp s
    } else {
      emit("*");
    }
    i += len;
  }
  return out;
}

BigramMap build_bigram_map(std::string_view normalized) {
  BigramMap map;
  for (char c : normalized)
    if (symbol_ordinal(c) < 0)
      throw EncodingError("character outside the bigram alphabet in '" + std::string(normalized) + "'");
  if (normalized.size() < 2) {
    map.bits.set(kEmptyFieldBigram);
    map.cardinality = 1;
    return map;
  }
  for (std::size_t i = 0; i + 1 < normalized.size(); ++i)
    map.bits.set(static_cast<std::size_t>(bigram_index(normalized[i], normalized[i + 1])));
  map.cardinality = static_cast<unsigned>(map.bits.count());
  if (map.cardinality > kMaxBigrams)
    throw EncodingError("field has " + std::to_string(map.cardinality) + " distinct bigrams, more than " +
                        std::to_string(kMaxBigrams));
  return map;
}

namespace {

std::optional<u64> parse_exact(std::string_view raw, std::string_view field) {
  while (!raw.empty() && is_space(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
  while (!raw.empty() && is_space(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
  if (raw.empty()) return std::nullopt;
  u64 v = 0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec == std::errc::result_out_of_range || (ec == std::errc{} && v >= (u64{1} << 32)))
    throw EncodingError(std::string(field) + " value '" + std::string(raw) + "' is not below 2^32");
  if (ec != std::errc{} || ptr != raw.data() + raw.size())
    throw EncodingError(std::string(field) + " value '" + std::string(raw) + "' is not a non-negative integer");
  return v;
}

}  // namespace

EncodedRecord encode_record(const RawRecord& raw) {
  EncodedRecord rec;
  std::string combined;
  std::uint8_t parts = 0;
  for (const std::string* part : {&raw.first_name, &raw.last_name, &raw.birth_name}) {
    std::string norm = normalize_text(*part);
    if (norm.empty()) continue;
    if (!combined.empty()) combined.push_back(' ');
    combined += norm;
    ++parts;
  }
  rec.name = build_bigram_map(combined);
  rec.delta[field_index(Field::Name)] = parts;

  const std::string city = normalize_text(raw.city);
  rec.city = build_bigram_map(city);
  rec.delta[field_index(Field::City)] = city.empty() ? 0 : 3;

  const std::array<const std::string*, kExactFieldCount> exact = {&raw.postcode, &raw.birth_year,
                                                                 &raw.birth_month, &raw.birth_day};
  for (std::size_t e = 0; e < kExactFieldCount; ++e) {
    auto v = parse_exact(*exact[e], kFieldNames[kFuzzyFieldCount + e]);
    rec.exact[e] = v.value_or(0);
    rec.delta[kFuzzyFieldCount + e] = v ? 3 : 0;
  }
  return rec;
}

ScoreFraction dice_fraction(const BigramMap& x, const BigramMap& y) {
  return ScoreFraction{2 * (x.bits & y.bits).count(), u64{x.cardinality} + y.cardinality};
}

ScoreFraction record_score_fraction(const EncodedRecord& x, const EncodedRecord& y,
                                    const LinkageConfig& config) {
  std::array<u64, kFieldCount> u{};
  for (std::size_t f = 0; f < kFieldCount; ++f)
    u[f] = u64{x.delta[f]} * y.delta[f] * config.weights[f];

  const ScoreFraction name = dice_fraction(x.name, y.name);
  const ScoreFraction city = dice_fraction(x.city, y.city);

  u64 exact_sum = 0;
  for (std::size_t e = 0; e < kExactFieldCount; ++e)
    if (exact_similarity(x.exact[e], y.exact[e])) exact_sum += u[kFuzzyFieldCount + e];

  const u64 total = std::accumulate(u.begin(), u.end(), u64{0});
  if (total == 0) return ScoreFraction{0, 1};
  const u64 nd = name.d * city.d;
  return ScoreFraction{u[field_index(Field::Name)] * name.n * city.d +
                           u[field_index(Field::City)] * city.n * name.d + exact_sum * nd,
                       total * nd};
}

void BoundTracker::observe_score(const ScoreFraction& s) {
  max_numerator = std::max(max_numerator, s.n);
  max_denominator = std::max(max_denominator, s.d);
}

void BoundTracker::observe_compare(u64 a, u64 b) {
  max_operand = std::max({max_operand, a, b});
  ++comparisons;
}

bool exceeds_threshold(const ScoreFraction& s, const LinkageConfig& config, BoundTracker* tracker) {
  // Strict '>' realised as '>=' against tau*d + 1.
  const u64 lhs = s.n * kThresholdScale;
  const u64 rhs = config.tau_fixed * s.d + 1;
  if (tracker) tracker->observe_compare(lhs, rhs);
  return lhs >= rhs;
}

PlainMatch best_match_plain(const EncodedRecord& query, std::span<const EncodedRecord> db,
                            const LinkageConfig& config) {
  if (db.empty()) throw std::invalid_argument("best_match_plain: empty database");
  PlainMatch best{0, record_score_fraction(query, db[0], config), false};
  for (std::size_t j = 1; j < db.size(); ++j) {
    const ScoreFraction s = record_score_fraction(query, db[j], config);
    if (!at_least(best.score, s)) best = PlainMatch{j, s, false};
  }
  best.matched = exceeds_threshold(best.score, config);
  return best;
}

std::size_t tournament_argmax(std::span<const ScoreFraction> scores, BoundTracker* tracker) {
  if (scores.empty()) throw std::invalid_argument("tournament_argmax: no scores");
  std::vector<std::size_t> alive(scores.size());
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  if (tracker)
    for (const auto& s : scores) tracker->observe_score(s);
  while (alive.size() > 1) {
    std::vector<std::size_t> next;
    next.reserve((alive.size() + 1) / 2);
    for (std::size_t k = 0; k + 1 < alive.size(); k += 2) {
      const ScoreFraction& l = scores[alive[k]];
      const ScoreFraction& r = scores[alive[k + 1]];
      const u64 lhs = l.n * r.d;
      const u64 rhs = r.n * l.d;
      if (tracker) tracker->observe_compare(lhs, rhs);
      next.push_back(lhs >= rhs ? alive[k] : alive[k + 1]);
    }
    if (alive.size() % 2 == 1) next.push_back(alive.back());
    alive = std::move(next);
  }
  return alive.front();
}

}  // namespace pprl
