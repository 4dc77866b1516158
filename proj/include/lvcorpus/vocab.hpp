#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lvcorpus/document.hpp"

namespace lvcorpus {

using TokenId = std::uint32_t;

inline constexpr std::size_t kDefaultVocabSize = 32'768;

/// How pieces after the first in a word (or the first piece of a word after
/// whitespace) are marked.
enum class Continuation {
  wordpiece_prefix,   // non-initial pieces carry the marker ("##ība")
  word_start_marker,  // initial pieces of every word but the first carry it ("Ġvārds")
};

struct VocabOptions {
  std::optional<std::size_t> expected_size;
  Continuation continuation = Continuation::wordpiece_prefix;
  std::string marker = "##";
};

struct SpecialTokens {
  TokenId unk = 0;
  TokenId pad = 0;
  TokenId mask = 0;
  TokenId bos = 0;
  TokenId eos = 0;
};

/// Escapes a byte-level piece for the vocabulary file: bytes outside
/// printable ASCII that are not part of a well-formed UTF-8 sequence, plus
/// space, DEL and backslash, become \xNN.
std::string escape_piece(std::string_view bytes);
/// Inverse of escape_piece; nullopt on a malformed escape.
std::optional<std::string> unescape_piece(std::string_view line);

/// Fixed byte-level subword vocabulary, ids = zero-based line numbers.
class SubwordVocab {
 public:
  /// Validates uniqueness, specials and size; errors name the offending line.
  static SubwordVocab load(const std::string& path, const VocabOptions& opts = {});
  static SubwordVocab from_pieces(std::vector<std::string> pieces, const VocabOptions& opts = {});

  void save(const std::string& path) const;

  std::size_t size() const noexcept { return pieces_.size(); }
  const std::string& piece(TokenId id) const { return pieces_.at(id); }
  std::optional<TokenId> find(std::string_view piece) const;
  const SpecialTokens& specials() const noexcept { return specials_; }
  bool is_special(TokenId id) const noexcept;
  const VocabOptions& options() const noexcept { return opts_; }
  std::size_t max_piece_bytes() const noexcept { return max_piece_bytes_; }

 private:
  SubwordVocab() = default;
  void index(const std::string& origin);

  VocabOptions opts_;
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, TokenId> ids_;
  SpecialTokens specials_;
  std::size_t max_piece_bytes_ = 0;
};

/// Greedy longest-match-first over each whitespace-delimited word's bytes.
/// A byte no piece covers becomes <unk> and matching resumes after it.
std::vector<TokenId> tokenize(std::string_view text, const SubwordVocab& vocab);

/// Joins pieces back into bytes, one space between words.
std::string detokenize(std::span<const TokenId> ids, const SubwordVocab& vocab);

/// Length of tokenize(doc.text); stored into doc.token_count.
std::size_t token_count(Document& doc, const SubwordVocab& vocab);

/// Stage "tokenize": sets token_count on every document; rejects nothing.
StageResult count_tokens(std::vector<Document> docs, const SubwordVocab& vocab,
                         unsigned workers = 1);

}  // namespace lvcorpus
