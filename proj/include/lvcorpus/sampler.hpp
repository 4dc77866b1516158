#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lvcorpus/document.hpp"
#include "lvcorpus/error.hpp"

namespace lvcorpus {

/// Token-length interval [min_tokens, max_tokens) with a token budget.
struct BucketQuota {
  std::string name;
  std::size_t min_tokens = 0;
  std::optional<std::size_t> max_tokens;  // nullopt = unbounded
  std::size_t target_tokens = 0;

  bool contains(std::size_t tokens) const noexcept {
    return tokens >= min_tokens && (!max_tokens || tokens < *max_tokens);
  }
};

/// short [0,1024), mid [1024,4096), long [4096,inf) with budgets in the
/// ratio 1:2:2, i.e. 0.5, 1 and 1 times `scale` tokens.
std::vector<BucketQuota> default_quotas(std::size_t scale = 1'000'000'000);

/// Empty when the buckets are non-overlapping, cover [0, inf) and all have
/// positive targets.
std::vector<Issue> quota_violations(std::span<const BucketQuota> quotas,
                                    const std::string& prefix = "buckets");

/// Name of the bucket containing `tokens`. Quotas must be valid.
std::string_view assign_bucket(std::size_t tokens, std::span<const BucketQuota> quotas);

enum class SampleMode { quality, uniform };

struct SampleConfig {
  std::uint64_t seed = 0;
  SampleMode mode = SampleMode::quality;
  double overshoot = 0.01;  // accept up to target * (1 + overshoot)
  double min_fill = 0.98;   // below target * min_fill the bucket is flagged partial
};

struct BucketOutcome {
  std::string name;
  std::size_t target_tokens = 0;
  std::size_t supply_tokens = 0;
  std::size_t supply_docs = 0;
  std::size_t realized_tokens = 0;
  std::size_t docs = 0;
  bool partial = false;
};

struct SampleResult : StageResult {
  std::vector<BucketOutcome> buckets;
};

/// Per bucket, walks candidates best-first (ascending perplexity, then id;
/// documents without a score last) or in seeded random order, taking each
/// document that keeps the running sum within target * (1 + overshoot) until
/// the target is reached. Unselected documents are rejected as not_sampled.
/// Throws std::invalid_argument when a document has no token_count.
SampleResult sample_to_quota(std::vector<Document> docs, std::span<const BucketQuota> quotas,
                             const SampleConfig& cfg = {});

}  // namespace lvcorpus
