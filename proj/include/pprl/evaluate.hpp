#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pprl/linkage.hpp"

namespace pprl::eval {

/// Best match of one query record, before any threshold is applied.
struct QueryBest {
  std::size_t index = 0;
  ScoreFraction score;
};

struct ThresholdRow {
  double tau = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t total() const { return fp + fn; }
};

struct EvalReport {
  std::vector<ThresholdRow> rows;  // one per requested threshold
  ThresholdRow best;               // minimum total error over a fine grid
  double auc = 0;
  std::size_t queries = 0;
  std::size_t with_counterpart = 0;
};

/// counterpart[i] is the true match of query i in the database, if any.
/// A match is declared when score > tau (same rule as the protocol).
EvalReport evaluate(std::span<const QueryBest> results, std::span<const std::optional<std::size_t>> counterpart,
                    std::span<const double> thresholds);

ThresholdRow errors_at(std::span<const QueryBest> results, std::span<const std::optional<std::size_t>> counterpart,
                       double tau);

/// Rank statistic of the scores of positives against negatives; ties count
/// one half.
double roc_auc(std::span<const double> scores, const std::vector<bool>& positive);

/// Plaintext best match of every query.
std::vector<QueryBest> best_matches(std::span<const EncodedRecord> queries, std::span<const EncodedRecord> db,
                                    const LinkageConfig& config);

/// Same through the secure protocol on an in-process cluster. Each query runs
/// with full disclosure and the smallest threshold, so every best score above
/// 2^-16 is revealed; lower scores come back as 0.
std::vector<QueryBest> secure_best_matches(std::span<const EncodedRecord> queries, std::span<const EncodedRecord> db,
                                           const LinkageConfig& config);

std::vector<std::optional<std::size_t>> counterparts(std::size_t queries,
                                                     std::span<const std::pair<std::size_t, std::size_t>> truth);

}  // namespace pprl::eval
