#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lvcorpus/document.hpp"

namespace lvcorpus {

/// Sorted, deduplicated 64-bit hashes of lowercased word n-grams.
struct ShingleSet {
  std::vector<std::uint64_t> hashes;
  std::size_t n = 5;

  bool empty() const noexcept { return hashes.empty(); }
  std::size_t size() const noexcept { return hashes.size(); }
  bool operator==(const ShingleSet&) const = default;
};

/// Texts with fewer than n words yield the single hash of the whole word
/// sequence; empty texts yield an empty set.
ShingleSet shingles(std::string_view text, std::size_t n = 5);

/// Exact |A ∩ B| / |A ∪ B|; 1.0 for two empty sets.
double exact_jaccard(const ShingleSet& a, const ShingleSet& b);

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

struct MinHashSignature {
  std::vector<std::uint64_t> values;
  std::uint64_t perm_seed = 0;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const MinHashSignature&) const = default;
};

/// k members of the universal family h(x) = (a*x + b) mod (2^61 - 1),
/// coefficients drawn from perm_seed.
class MinHasher {
 public:
  MinHasher(std::size_t k, std::uint64_t perm_seed);

  std::size_t size() const noexcept { return a_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  /// i-th permutation applied to one shingle hash.
  std::uint64_t permute(std::size_t i, std::uint64_t x) const noexcept;

  /// Throws std::invalid_argument on an empty set.
  MinHashSignature sign(const ShingleSet& s) const;

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> a_;
  std::vector<std::uint64_t> b_;
};

MinHashSignature minhash_signature(const ShingleSet& s, std::size_t k, std::uint64_t perm_seed);

/// Fraction of equal positions. Throws std::invalid_argument on a k or seed mismatch.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

/// (1/b)^(1/r): the similarity at which the banding S-curve is steepest.
double lsh_threshold(std::size_t bands, std::size_t rows);

/// Probability that a pair of similarity s shares at least one band.
double lsh_candidate_probability(double s, std::size_t bands, std::size_t rows);

/// Band buckets over signatures added in order; documents are addressed by
/// insertion index.
class LshIndex {
 public:
  LshIndex(std::size_t bands, std::size_t rows);

  std::size_t bands() const noexcept { return bands_; }
  std::size_t rows() const noexcept { return rows_; }

  /// Returns the index assigned to the signature.
  std::size_t insert(const MinHashSignature& sig);

  /// Candidate pairs (i < j), sorted, with the number of bands they share.
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> candidate_pairs() const;

  std::uint64_t band_hash(const MinHashSignature& sig, std::size_t band) const;

 private:
  std::size_t bands_;
  std::size_t rows_;
  std::size_t count_ = 0;
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>> buckets_;
};

struct DuplicateCluster {
  std::vector<std::size_t> members;  // input indices, ascending
  std::size_t band_hits = 0;         // shared bands summed over merged pairs
};

/// Optional replacement for signature-estimated similarity (exact-verify mode).
using PairSimilarity = std::function<double(std::size_t, std::size_t)>;

/// Candidates share a band; candidates whose similarity reaches `threshold`
/// are merged with union-find. Only clusters of size >= 2 are returned,
/// ordered by their smallest member.
std::vector<DuplicateCluster> find_duplicate_clusters(std::span<const MinHashSignature> signatures,
                                                      std::size_t bands, std::size_t rows,
                                                      double threshold = 0.7,
                                                      const PairSimilarity& similarity = {});

struct NearDedupConfig {
  std::size_t ngram = 5;
  std::size_t num_perm = 112;
  std::size_t bands = 14;
  std::size_t rows = 8;
  double threshold = 0.7;
  std::uint64_t perm_seed = 0x6c76636f72707573ULL;
  bool exact_verify = false;
  unsigned workers = 1;
};

/// {"kept": id, "removed": [ids], "band_hits": n}
struct ClusterReport {
  std::string kept;
  std::vector<std::string> removed;
  std::size_t band_hits = 0;

  std::string to_jsonl() const;
};

struct NearDedupResult : StageResult {
  std::vector<ClusterReport> clusters;
};

/// Keeps the longest document of each cluster (ties: smallest id);
/// the others are rejected as near_dup with the kept id recorded.
NearDedupResult dedup_near(std::vector<Document> docs, const NearDedupConfig& cfg = {});

}  // namespace lvcorpus
