#include "pprl/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "pprl/cluster.hpp"

namespace pprl::eval {

ThresholdRow errors_at(std::span<const QueryBest> results, std::span<const std::optional<std::size_t>> counterpart,
                       double tau) {
  if (results.size() != counterpart.size()) throw std::invalid_argument("results and truth differ in length");
  LinkageConfig rule;
  rule.tau_fixed = threshold_to_fixed(tau);
  ThresholdRow row{tau, 0, 0};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const bool matched = exceeds_threshold(results[i].score, rule);
    const bool correct = counterpart[i] && *counterpart[i] == results[i].index;
    if (matched && !correct) ++row.fp;
    if (counterpart[i] && !(matched && correct)) ++row.fn;
  }
  return row;
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw std::invalid_argument("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mid-ranks over tie groups, then Mann-Whitney U of the positives.
  double rank_sum = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (positive[order[k]]) {
        rank_sum += mid;
        ++pos;
      }
    i = j;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("AUC needs both positives and negatives");
  const double u = rank_sum - static_cast<double>(pos) * static_cast<double>(pos + 1) / 2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

EvalReport evaluate(std::span<const QueryBest> results, std::span<const std::optional<std::size_t>> counterpart,
                    std::span<const double> thresholds) {
  EvalReport rep;
  rep.queries = results.size();
  for (double t : thresholds) rep.rows.push_back(errors_at(results, counterpart, t));

  constexpr int kGrid = 2000;
  rep.best = errors_at(results, counterpart, 1.0 / kGrid);
  for (int k = 2; k < kGrid; ++k) {
    const ThresholdRow r = errors_at(results, counterpart, static_cast<double>(k) / kGrid);
    if (r.total() < rep.best.total()) rep.best = r;
  }

  std::vector<double> scores;
  std::vector<bool> labels;
  for (std::size_t i = 0; i < results.size(); ++i) {
    scores.push_back(results[i].score.value());
    labels.push_back(counterpart[i].has_value());
    rep.with_counterpart += counterpart[i].has_value();
  }
  rep.auc = roc_auc(scores, labels);
  return rep;
}

std::vector<QueryBest> best_matches(std::span<const EncodedRecord> queries, std::span<const EncodedRecord> db,
                                    const LinkageConfig& config) {
  std::vector<QueryBest> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const PlainMatch m = best_match_plain(q, db, config);
    out.push_back({m.index, m.score});
  }
  return out;
}

std::vector<QueryBest> secure_best_matches(std::span<const EncodedRecord> queries, std::span<const EncodedRecord> db,
                                           const LinkageConfig& config) {
  LinkageConfig reveal = config;
  reveal.disclosure = Disclosure::Full;
  reveal.tau_fixed = 1;
  LocalCluster cluster(mpc::PairSeeds::from_master(random_seed()));
  RandomStream sharing(random_seed());
  const auto [db0, db1] = LocalCluster::share_database(db, sharing);
  std::vector<QueryBest> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const auto r = cluster.query(q, db0, db1, reveal, sharing).result;
    if (r.matched)
      out.push_back({static_cast<std::size_t>(r.index), *r.score});
    else
      out.push_back({0, ScoreFraction{0, 1}});
  }
  return out;
}

std::vector<std::optional<std::size_t>> counterparts(std::size_t queries,
                                                     std::span<const std::pair<std::size_t, std::size_t>> truth) {
  std::vector<std::optional<std::size_t>> out(queries);
  for (const auto& [a, b] : truth) {
    if (a >= queries) throw std::invalid_argument("truth refers to query row " + std::to_string(a));
    if (out[a]) throw std::invalid_argument("query row " + std::to_string(a) + " has two counterparts");
    out[a] = b;
  }
  return out;
}

}  // namespace pprl::eval
