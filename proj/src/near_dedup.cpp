#include "lvcorpus/near_dedup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "lvcorpus/hashing.hpp"
#include "lvcorpus/parallel.hpp"
#include "lvcorpus/rng.hpp"
#include "lvcorpus/text.hpp"

namespace lvcorpus {

namespace {

std::uint64_t reduce61(__uint128_t t) noexcept {
  auto r = static_cast<std::uint64_t>(t & kMersenne61) + static_cast<std::uint64_t>(t >> 61);
  r = (r & kMersenne61) + (r >> 61);
  return r >= kMersenne61 ? r - kMersenne61 : r;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller index becomes the root so results do not depend on merge order.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

ShingleSet shingles(std::string_view text, std::size_t n) {
  if (n == 0) throw std::invalid_argument("shingle order must be >= 1");
  ShingleSet set;
  set.n = n;
  const std::string lowered = to_lower(text);
  const auto words = split_words(lowered);
  if (words.empty()) return set;

  std::string gram;
  auto window_hash = [&](std::size_t first, std::size_t count) {
    gram.clear();
    for (std::size_t i = 0; i < count; ++i) {
      if (i) gram += ' ';
      gram.append(words[first + i]);
    }
    return hash64(gram);
  };

  if (words.size() < n) {
    set.hashes.push_back(window_hash(0, words.size()));
    return set;
  }
  set.hashes.reserve(words.size() - n + 1);
  for (std::size_t i = 0; i + n <= words.size(); ++i) set.hashes.push_back(window_hash(i, n));
  std::sort(set.hashes.begin(), set.hashes.end());
  set.hashes.erase(std::unique(set.hashes.begin(), set.hashes.end()), set.hashes.end());
  return set;
}

double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto i = a.hashes.begin();
  auto j = b.hashes.begin();
  while (i != a.hashes.end() && j != b.hashes.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MinHasher::MinHasher(std::size_t k, std::uint64_t perm_seed) : seed_(perm_seed) {
  if (k == 0) throw std::invalid_argument("num_perm must be >= 1");
  Rng rng(perm_seed);
  a_.resize(k);
  b_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    a_[i] = 1 + rng.below(kMersenne61 - 1);
    b_[i] = rng.below(kMersenne61);
  }
}

std::uint64_t MinHasher::permute(std::size_t i, std::uint64_t x) const noexcept {
  const std::uint64_t xr = reduce61(x);
  return reduce61(static_cast<__uint128_t>(a_[i]) * xr + b_[i]);
}

MinHashSignature MinHasher::sign(const ShingleSet& s) const {
  if (s.empty()) throw std::invalid_argument("MinHash of an empty shingle set");
  MinHashSignature sig;
  sig.perm_seed = seed_;
  sig.values.assign(a_.size(), ~std::uint64_t{0});
  for (const std::uint64_t h : s.hashes) {
    const std::uint64_t x = reduce61(h);
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const std::uint64_t v = reduce61(static_cast<__uint128_t>(a_[i]) * x + b_[i]);
      if (v < sig.values[i]) sig.values[i] = v;
    }
  }
  return sig;
}

MinHashSignature minhash_signature(const ShingleSet& s, std::size_t k, std::uint64_t perm_seed) {
  return MinHasher(k, perm_seed).sign(s);
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.size() != b.size()) throw std::invalid_argument("signature lengths differ");
  if (a.perm_seed != b.perm_seed) throw std::invalid_argument("signature seeds differ");
  if (a.size() == 0) throw std::invalid_argument("empty signatures");
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a.size(); ++i) equal += a.values[i] == b.values[i];
  return static_cast<double>(equal) / static_cast<double>(a.size());
}

double lsh_threshold(std::size_t bands, std::size_t rows) {
  return std::pow(1.0 / static_cast<double>(bands), 1.0 / static_cast<double>(rows));
}

double lsh_candidate_probability(double s, std::size_t bands, std::size_t rows) {
  return 1.0 - std::pow(1.0 - std::pow(s, static_cast<double>(rows)), static_cast<double>(bands));
}

LshIndex::LshIndex(std::size_t bands, std::size_t rows)
    : bands_(bands), rows_(rows), buckets_(bands) {
  if (bands == 0 || rows == 0) throw std::invalid_argument("bands and rows must be >= 1");
}

std::uint64_t LshIndex::band_hash(const MinHashSignature& sig, std::size_t band) const {
  return hash64(std::span<const std::uint64_t>(sig.values).subspan(band * rows_, rows_), band);
}

std::size_t LshIndex::insert(const MinHashSignature& sig) {
  if (sig.size() != bands_ * rows_) {
    throw std::invalid_argument("signature length " + std::to_string(sig.size()) +
                                " != bands*rows " + std::to_string(bands_ * rows_));
  }
  const std::size_t idx = count_++;
  for (std::size_t band = 0; band < bands_; ++band) {
    buckets_[band][band_hash(sig, band)].push_back(idx);
  }
  return idx;
}

std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> LshIndex::candidate_pairs()
    const {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> hits;
  for (const auto& table : buckets_) {
    for (const auto& [hash, ids] : table) {
      for (std::size_t x = 0; x < ids.size(); ++x) {
        for (std::size_t y = x + 1; y < ids.size(); ++y) {
          ++hits[{std::min(ids[x], ids[y]), std::max(ids[x], ids[y])}];
        }
      }
    }
  }
  return {hits.begin(), hits.end()};
}

std::vector<DuplicateCluster> find_duplicate_clusters(std::span<const MinHashSignature> signatures,
                                                      std::size_t bands, std::size_t rows,
                                                      double threshold,
                                                      const PairSimilarity& similarity) {
  LshIndex index(bands, rows);
  for (const auto& sig : signatures) index.insert(sig);

  DisjointSets sets(signatures.size());
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> edge_hits;
  for (const auto& [pair, hits] : index.candidate_pairs()) {
    const auto [i, j] = pair;
    const double sim =
        similarity ? similarity(i, j) : estimate_jaccard(signatures[i], signatures[j]);
    if (sim >= threshold) {
      sets.unite(i, j);
      edges.push_back(pair);
      edge_hits.push_back(hits);
    }
  }

  std::map<std::size_t, DuplicateCluster> by_root;
  for (std::size_t i = 0; i < signatures.size(); ++i) by_root[sets.find(i)].members.push_back(i);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    by_root[sets.find(edges[e].first)].band_hits += edge_hits[e];
  }
  std::vector<DuplicateCluster> clusters;
  for (auto& [root, cluster] : by_root) {
    if (cluster.members.size() >= 2) clusters.push_back(std::move(cluster));
  }
  return clusters;
}

std::string ClusterReport::to_jsonl() const {
  nlohmann::ordered_json j;
  j["kept"] = kept;
  j["removed"] = removed;
  j["band_hits"] = band_hits;
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

NearDedupResult dedup_near(std::vector<Document> docs, const NearDedupConfig& cfg) {
  Stopwatch clock;
  if (cfg.bands * cfg.rows != cfg.num_perm) {
    throw std::invalid_argument("bands*rows must equal num_perm");
  }
  std::vector<ShingleSet> sets(docs.size());
  parallel_for(docs.size(), cfg.workers,
               [&](std::size_t i) { sets[i] = shingles(docs[i].text, cfg.ngram); });

  // Documents without words cannot be signed and are never clustered.
  std::vector<std::size_t> indexed;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!sets[i].empty()) indexed.push_back(i);
  }
  const MinHasher hasher(cfg.num_perm, cfg.perm_seed);
  std::vector<MinHashSignature> sigs(indexed.size());
  parallel_for(indexed.size(), cfg.workers,
               [&](std::size_t k) { sigs[k] = hasher.sign(sets[indexed[k]]); });

  PairSimilarity verify;
  if (cfg.exact_verify) {
    verify = [&](std::size_t a, std::size_t b) {
      return exact_jaccard(sets[indexed[a]], sets[indexed[b]]);
    };
  }
  const auto clusters = find_duplicate_clusters(sigs, cfg.bands, cfg.rows, cfg.threshold, verify);

  NearDedupResult result;
  std::vector<bool> alive(docs.size(), true);
  std::vector<const std::string*> kept_by(docs.size(), nullptr);
  for (const auto& c : clusters) {
    std::size_t best = indexed[c.members.front()];
    for (const std::size_t m : c.members) {
      const std::size_t d = indexed[m];
      if (docs[d].word_count > docs[best].word_count ||
          (docs[d].word_count == docs[best].word_count && docs[d].id < docs[best].id)) {
        best = d;
      }
    }
    ClusterReport report;
    report.kept = docs[best].id;
    report.band_hits = c.band_hits;
    for (const std::size_t m : c.members) {
      const std::size_t d = indexed[m];
      if (d == best) continue;
      alive[d] = false;
      kept_by[d] = &docs[best].id;
      report.removed.push_back(docs[d].id);
    }
    result.clusters.push_back(std::move(report));
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (alive[i]) {
      result.kept.push_back(docs[i]);
    } else {
      Reject r = make_reject(docs[i], "dedup-near", "near_dup");
      r.kept = *kept_by[i];
      result.rejects.push_back(std::move(r));
    }
  }
  result.stats = tally_stage("dedup-near", docs, result.kept, result.rejects);
  result.stats.extras["clusters"] = clusters.size();
  result.stats.extras["lsh_threshold"] = lsh_threshold(cfg.bands, cfg.rows);
  result.stats.wall_time = clock.seconds();
  return result;
}

}  // namespace lvcorpus
