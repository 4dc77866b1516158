#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lvcorpus/document.hpp"

namespace lvcorpus {

using WordId = std::uint32_t;

inline constexpr std::size_t kMaxNgramOrder = 7;

/// Fixed-capacity word-id sequence used as a count-table key.
struct Gram {
  std::array<WordId, kMaxNgramOrder> ids{};
  std::uint8_t len = 0;

  Gram() = default;
  explicit Gram(std::span<const WordId> s);

  std::span<const WordId> view() const noexcept { return {ids.data(), len}; }
  bool operator==(const Gram& o) const noexcept;
  bool operator<(const Gram& o) const noexcept;
};

struct GramHash {
  std::size_t operator()(const Gram& g) const noexcept;
};

/// Lowercased whitespace tokens of each non-empty line.
std::vector<std::vector<std::string>> lm_sentences(std::string_view text);

/// Interpolated Kneser-Ney model with one absolute discount per order.
///
/// Highest-order n-grams and n-grams that begin with <s> keep raw counts;
/// every other lower-order n-gram uses its continuation count (number of
/// distinct left extensions). D_o = n1 / (n1 + 2 n2) from counts-of-counts
/// of those adjusted counts. The unigram level interpolates with the
/// uniform distribution over every predictable word (vocabulary minus <s>).
class NgramModel {
 public:
  static constexpr WordId kUnk = 0;
  static constexpr WordId kBos = 1;
  static constexpr WordId kEos = 2;

  struct TrainOptions {
    std::size_t order = 5;
    std::size_t min_count = 2;
    /// Used when an order has no singletons or no doubletons.
    double fallback_discount = 0.5;
    unsigned workers = 1;
  };

  /// Throws std::invalid_argument when the corpus has no tokens.
  static NgramModel train(const std::vector<Document>& corpus, const TrainOptions& opts);
  static NgramModel train(const std::vector<Document>& corpus) { return train(corpus, {}); }
  static NgramModel train_sentences(const std::vector<std::vector<std::string>>& sentences,
                                    const TrainOptions& opts);

  std::size_t order() const noexcept { return order_; }
  std::size_t min_count() const noexcept { return min_count_; }
  std::size_t vocab_size() const noexcept { return words_.size(); }
  /// Vocabulary minus <s>.
  std::size_t predictable_size() const noexcept { return words_.size() - 1; }
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }

  WordId id_of(std::string_view word) const;
  const std::string& word(WordId id) const { return words_.at(id); }
  double discount(std::size_t ord) const { return discounts_.at(ord - 1); }

  /// Adjusted count of an n-gram (0 when unseen).
  std::uint64_t adjusted_count(std::span<const WordId> gram) const;

  /// p(w | history); only the last order-1 ids of history are used.
  double prob(std::span<const WordId> history, WordId w) const;
  double log_prob(std::span<const WordId> history, WordId w) const;

  /// Every context observed at an order (length ord-1), sorted.
  std::vector<std::vector<WordId>> contexts(std::size_t ord) const;

  std::vector<WordId> encode(const std::vector<std::string>& sentence) const;

  void save(const std::string& path) const;
  static NgramModel load(const std::string& path);

 private:
  struct ContextStats {
    std::uint64_t total = 0;  // sum of adjusted counts
    std::uint64_t types = 0;  // distinct continuations
  };

  NgramModel() = default;
  void rebuild_contexts();

  std::size_t order_ = 0;
  std::size_t min_count_ = 0;
  std::uint64_t total_tokens_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<double> discounts_;
  std::vector<std::unordered_map<Gram, std::uint64_t, GramHash>> counts_;      // per order
  std::vector<std::unordered_map<Gram, ContextStats, GramHash>> context_stats_;  // per order
};

struct PerplexityVerdict {
  std::string doc_id;
  double perplexity = std::numeric_limits<double>::infinity();
  double log_prob = 0.0;  // natural log
  std::size_t n_scored_tokens = 0;
  bool kept = false;
  std::string reason;  // empty | high_ppl, blank when kept
};

/// Every word and each sentence end is scored; OOV words as <unk>.
PerplexityVerdict perplexity(const NgramModel& model, const Document& doc);

struct PerplexityPolicy {
  enum class Kind { absolute, percentile };
  Kind kind = Kind::percentile;
  double value = 90.0;

  static PerplexityPolicy absolute(double threshold) { return {Kind::absolute, threshold}; }
  /// Cutoff is the nearest-rank p-th percentile of the batch's perplexities.
  static PerplexityPolicy percentile(double p) { return {Kind::percentile, p}; }
};

struct PerplexityFilterResult : StageResult {
  double cutoff = 0.0;
  std::vector<PerplexityVerdict> verdicts;
};

/// Scores every document (stored in Document::perplexity), then rejects
/// those above the cutoff as high_ppl and empty ones as empty.
/// A percentile policy over no scorable documents has an infinite cutoff.
PerplexityFilterResult filter_by_perplexity(std::vector<Document> docs, const NgramModel& model,
                                            const PerplexityPolicy& policy, unsigned workers = 1);

}  // namespace lvcorpus
