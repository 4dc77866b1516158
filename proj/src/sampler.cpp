#include "lvcorpus/sampler.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lvcorpus/rng.hpp"

namespace lvcorpus {

std::vector<BucketQuota> default_quotas(std::size_t scale) {
  return {
      {"short", 0, 1024, scale / 2},
      {"mid", 1024, 4096, scale},
      {"long", 4096, std::nullopt, scale},
  };
}

std::vector<Issue> quota_violations(std::span<const BucketQuota> quotas, const std::string& prefix) {
  std::vector<Issue> issues;
  if (quotas.empty()) {
    issues.push_back({prefix, "at least one bucket is required"});
    return issues;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return quotas[a].min_tokens < quotas[b].min_tokens; });
  for (std::size_t i = 0; i < quotas.size(); ++i) {
    const auto& q = quotas[i];
    const std::string path = prefix + "[" + std::to_string(i) + "]";
    if (q.name.empty()) issues.push_back({path + ".name", "must be non-empty"});
    if (q.target_tokens == 0) issues.push_back({path + ".target_tokens", "must be positive"});
    if (q.max_tokens && *q.max_tokens <= q.min_tokens) {
      issues.push_back({path + ".max_tokens", "must exceed min_tokens"});
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (quotas[j].name == q.name) issues.push_back({path + ".name", "duplicate bucket name"});
    }
  }
  std::size_t expected = 0;
  bool open_end = false;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& q = quotas[order[k]];
    const std::string path = prefix + "[" + std::to_string(order[k]) + "]";
    if (open_end) {
      issues.push_back({path + ".min_tokens", "overlaps an unbounded bucket"});
      continue;
    }
    if (q.min_tokens < expected) {
      issues.push_back({path + ".min_tokens", "overlaps the preceding bucket"});
    } else if (q.min_tokens > expected) {
      issues.push_back({path + ".min_tokens",
                        "gap: token counts [" + std::to_string(expected) + ", " +
                            std::to_string(q.min_tokens) + ") are not covered"});
    }
    if (q.max_tokens) {
      expected = std::max(expected, *q.max_tokens);
    } else {
      open_end = true;
    }
  }
  if (!open_end) issues.push_back({prefix, "no unbounded bucket: coverage must extend to infinity"});
  return issues;
}

std::string_view assign_bucket(std::size_t tokens, std::span<const BucketQuota> quotas) {
  for (const auto& q : quotas) {
    if (q.contains(tokens)) return q.name;
  }
  throw std::invalid_argument("no bucket contains " + std::to_string(tokens) + " tokens");
}

SampleResult sample_to_quota(std::vector<Document> docs, std::span<const BucketQuota> quotas,
                             const SampleConfig& cfg) {
  Stopwatch clock;
  if (const auto issues = quota_violations(quotas); !issues.empty()) throw ValidationError(issues);

  std::vector<std::vector<std::size_t>> members(quotas.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!docs[i].token_count) {
      throw std::invalid_argument("document " + docs[i].id + " has no token_count");
    }
    const std::size_t t = *docs[i].token_count;
    for (std::size_t b = 0; b < quotas.size(); ++b) {
      if (quotas[b].contains(t)) {
        members[b].push_back(i);
        break;
      }
    }
  }

  SampleResult result;
  std::vector<bool> chosen(docs.size(), false);
  for (std::size_t b = 0; b < quotas.size(); ++b) {
    const BucketQuota& q = quotas[b];
    auto& cand = members[b];
    BucketOutcome out;
    out.name = q.name;
    out.target_tokens = q.target_tokens;
    out.supply_docs = cand.size();
    for (const std::size_t i : cand) out.supply_tokens += *docs[i].token_count;

    if (cfg.mode == SampleMode::quality) {
      constexpr double inf = std::numeric_limits<double>::infinity();
      std::sort(cand.begin(), cand.end(), [&](std::size_t x, std::size_t y) {
        const double px = docs[x].perplexity.value_or(inf);
        const double py = docs[y].perplexity.value_or(inf);
        if (px != py) return px < py;
        return docs[x].id < docs[y].id;
      });
    } else {
      // Canonical order first so the shuffle depends only on (seed, content).
      std::sort(cand.begin(), cand.end(),
                [&](std::size_t x, std::size_t y) { return docs[x].id < docs[y].id; });
      Rng rng(derive_seed(cfg.seed, b));
      rng.shuffle(cand.begin(), cand.end());
    }

    const double cap = static_cast<double>(q.target_tokens) * (1.0 + cfg.overshoot);
    for (const std::size_t i : cand) {
      if (out.realized_tokens >= q.target_tokens) break;
      const std::size_t t = *docs[i].token_count;
      if (static_cast<double>(out.realized_tokens + t) > cap) continue;
      chosen[i] = true;
      out.realized_tokens += t;
      ++out.docs;
    }
    out.partial =
        static_cast<double>(out.realized_tokens) < static_cast<double>(q.target_tokens) * cfg.min_fill;
    result.buckets.push_back(std::move(out));
  }

  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (chosen[i]) {
      result.kept.push_back(docs[i]);
    } else {
      result.rejects.push_back(make_reject(docs[i], "sample", "not_sampled"));
    }
  }
  result.stats = tally_stage("sample", docs, result.kept, result.rejects);
  auto buckets = nlohmann::ordered_json::array();
  auto warnings = nlohmann::ordered_json::array();
  for (const auto& o : result.buckets) {
    buckets.push_back({{"name", o.name},
                       {"target_tokens", o.target_tokens},
                       {"realized_tokens", o.realized_tokens},
                       {"docs", o.docs},
                       {"supply_tokens", o.supply_tokens},
                       {"supply_docs", o.supply_docs},
                       {"partial", o.partial}});
    if (o.partial) {
      warnings.push_back("bucket " + o.name + ": realized " + std::to_string(o.realized_tokens) +
                         " of " + std::to_string(o.target_tokens) + " target tokens");
    }
  }
  result.stats.extras["buckets"] = std::move(buckets);
  result.stats.extras["warnings"] = std::move(warnings);
  result.stats.wall_time = clock.seconds();
  return result;
}

}  // namespace lvcorpus
