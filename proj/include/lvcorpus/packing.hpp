#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lvcorpus/vocab.hpp"

namespace lvcorpus {

inline constexpr std::size_t kSeqLenPresets[] = {512, 1024, 8096, 8192};

struct TokenizedDoc {
  std::string id;
  std::vector<TokenId> tokens;
};

/// Contiguous run [start, end) of one document inside a window.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t doc_index = 0;  // position in the packed stream
  std::string doc_id;

  std::size_t size() const noexcept { return end - start; }
  bool operator==(const Segment&) const = default;
};

struct PackedSequence {
  std::vector<TokenId> tokens;  // exactly seq_len ids
  std::vector<Segment> doc_boundaries;
  std::size_t pad_count = 0;

  std::size_t seq_len() const noexcept { return tokens.size(); }
  /// Segment ordinal per position, -1 on padding.
  std::vector<std::int32_t> attention_segments() const;
  bool operator==(const PackedSequence&) const = default;
};

struct PackConfig {
  std::size_t seq_len = 512;
  /// Split a document across windows instead of starting a new window.
  bool split_documents = true;
  /// Wrap every document as <s> ... </s>.
  bool wrap_specials = true;
  TokenId bos = 0;
  TokenId eos = 0;
  TokenId pad = 0;

  static PackConfig for_vocab(const SubwordVocab& vocab, std::size_t seq_len);
};

/// First-fit greedy packer as a fold over the document stream.
class GreedyPacker {
 public:
  explicit GreedyPacker(PackConfig cfg);

  void add(const TokenizedDoc& doc);
  /// Pads and emits the open window, if any.
  void finish();

  /// Completed windows since the last call.
  std::vector<PackedSequence> take();

  std::size_t real_tokens() const noexcept { return real_tokens_; }
  std::size_t window_tokens() const noexcept { return windows_emitted_ * cfg_.seq_len; }

 private:
  void append(std::span<const TokenId> piece, std::size_t doc_index, const std::string& id);
  void close_window();

  PackConfig cfg_;
  PackedSequence open_;
  std::vector<PackedSequence> done_;
  std::size_t docs_seen_ = 0;
  std::size_t real_tokens_ = 0;
  std::size_t windows_emitted_ = 0;
};

struct PackResult {
  std::vector<PackedSequence> windows;
  /// Non-pad positions / total positions; 1.0 for an empty stream.
  double efficiency = 1.0;
};

PackResult pack_greedy(std::span<const TokenizedDoc> docs, const PackConfig& cfg);

}  // namespace lvcorpus
