#pragma once

#include <chrono>
#include <span>

#include "pprl/config.hpp"
#include "pprl/protocol.hpp"

namespace pprl {

struct UploadReceipt {
  u64 db_size = 0;  // records held by the proxies after the upload
  u64 epoch = 0;
};

/// Shares the records and replaces this owner's range on both proxies.
UploadReceipt upload_records(const AppConfig& config, std::span<const EncodedRecord> records, u64 owner_id,
                             std::chrono::milliseconds timeout = std::chrono::minutes(2));

struct QueryOutcome {
  protocol::MatchResult result;
  protocol::ResultShares p0, p1;
  std::chrono::microseconds wall{0};
};

/// Shares the query, runs one linkage session and reveals the result.
QueryOutcome query_record(const AppConfig& config, const EncodedRecord& query,
                          std::chrono::milliseconds timeout = std::chrono::minutes(10));

}  // namespace pprl
