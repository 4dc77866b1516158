#include "lvcorpus/vocab.hpp"

#include <algorithm>
#include <fstream>

#include "lvcorpus/error.hpp"
#include "lvcorpus/parallel.hpp"
#include "lvcorpus/text.hpp"

namespace lvcorpus {

namespace {

constexpr const char* kHex = "0123456789ABCDEF";

// Length of the well-formed UTF-8 multibyte sequence starting at s[i], or 0.
std::size_t utf8_sequence_at(std::string_view s, std::size_t i) {
  const auto b = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  if (b >= 0xC2 && b <= 0xDF) {
    len = 2;
  } else if (b >= 0xE0 && b <= 0xEF) {
    len = 3;
  } else if (b >= 0xF0 && b <= 0xF4) {
    len = 4;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  return is_valid_utf8(s.substr(i, len)) ? len : 0;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

bool is_space_byte(char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }

}  // namespace

std::string escape_piece(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto b = static_cast<unsigned char>(bytes[i]);
    if (b > 0x20 && b < 0x7F && b != '\\') {
      out += static_cast<char>(b);
      ++i;
    } else if (const std::size_t len = b >= 0x80 ? utf8_sequence_at(bytes, i) : 0; len > 0) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out += "\\x";
      out += kHex[b >> 4];
      out += kHex[b & 0xF];
      ++i;
    }
  }
  return out;
}

std::optional<std::string> unescape_piece(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '\\') {
      out += line[i];
      continue;
    }
    if (i + 3 >= line.size()) return std::nullopt;
    if (line[i + 1] != 'x') return std::nullopt;
    const int hi = hex_value(line[i + 2]);
    const int lo = hex_value(line[i + 3]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out += static_cast<char>(hi * 16 + lo);
    i += 3;
  }
  return out;
}

SubwordVocab SubwordVocab::from_pieces(std::vector<std::string> pieces, const VocabOptions& opts) {
  SubwordVocab v;
  v.opts_ = opts;
  v.pieces_ = std::move(pieces);
  v.index("<pieces>");
  return v;
}

void SubwordVocab::index(const std::string& origin) {
  ids_.reserve(pieces_.size());
  for (TokenId id = 0; id < pieces_.size(); ++id) {
    const std::string& p = pieces_[id];
    const std::string where = origin + ":" + std::to_string(id + 1);
    if (p.empty()) {
      throw FormatError(where + ": empty token");
    }
    if (!ids_.emplace(p, id).second) {
      throw FormatError(where + ": duplicate token '" + escape_piece(p) + "' (first at line " +
                        std::to_string(ids_.at(p) + 1) + ")");
    }
    max_piece_bytes_ = std::max(max_piece_bytes_, p.size());
  }
  auto special = [&](const char* name) {
    const auto it = ids_.find(name);
    if (it == ids_.end()) throw FormatError(origin + ": missing special token " + name);
    return it->second;
  };
  specials_.unk = special("<unk>");
  specials_.pad = special("<pad>");
  specials_.mask = special("<mask>");
  specials_.bos = special("<s>");
  specials_.eos = special("</s>");
  if (opts_.expected_size && *opts_.expected_size != pieces_.size()) {
    throw FormatError(origin + ": vocabulary has " + std::to_string(pieces_.size()) +
                      " entries, expected " + std::to_string(*opts_.expected_size));
  }
}

SubwordVocab SubwordVocab::load(const std::string& path, const VocabOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  SubwordVocab v;
  v.opts_ = opts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto piece = unescape_piece(line);
    if (!piece) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": malformed escape");
    }
    v.pieces_.push_back(std::move(*piece));
  }
  if (in.bad()) throw IoError("read failure on " + path);
  v.index(path);
  return v;
}

void SubwordVocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& p : pieces_) out << escape_piece(p) << '\n';
  if (!out) throw IoError("write failure on " + path);
}

std::optional<TokenId> SubwordVocab::find(std::string_view piece) const {
  const auto it = ids_.find(std::string(piece));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool SubwordVocab::is_special(TokenId id) const noexcept {
  return id == specials_.unk || id == specials_.pad || id == specials_.mask ||
         id == specials_.bos || id == specials_.eos;
}

std::vector<TokenId> tokenize(std::string_view text, const SubwordVocab& vocab) {
  std::vector<TokenId> out;
  const auto& opts = vocab.options();
  const bool prefix_style = opts.continuation == Continuation::wordpiece_prefix;
  std::string candidate;
  bool first_word = true;

  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && is_space_byte(text[pos])) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && !is_space_byte(text[end])) ++end;
    const std::string_view word = text.substr(pos, end - pos);

    std::size_t start = 0;
    while (start < word.size()) {
      const bool marked = prefix_style ? start > 0 : (start == 0 && !first_word);
      const std::size_t marker_len = marked ? opts.marker.size() : 0;
      const std::size_t budget = vocab.max_piece_bytes() > marker_len
                                     ? vocab.max_piece_bytes() - marker_len
                                     : 0;
      std::size_t len = std::min(word.size() - start, budget);
      std::optional<TokenId> hit;
      for (; len > 0; --len) {
        candidate.clear();
        if (marked) candidate = opts.marker;
        candidate.append(word.substr(start, len));
        if ((hit = vocab.find(candidate))) break;
      }
      if (hit) {
        out.push_back(*hit);
        start += len;
      } else {
        out.push_back(vocab.specials().unk);
        start += 1;
      }
    }
    first_word = false;
    pos = end;
  }
  return out;
}

std::string detokenize(std::span<const TokenId> ids, const SubwordVocab& vocab) {
  const auto& opts = vocab.options();
  const bool prefix_style = opts.continuation == Continuation::wordpiece_prefix;
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    std::string_view piece = vocab.piece(ids[k]);
    const bool has_marker = piece.starts_with(opts.marker) && piece.size() > opts.marker.size();
    bool new_word;
    if (prefix_style) {
      new_word = !has_marker;
    } else {
      new_word = has_marker;
    }
    if (has_marker) piece.remove_prefix(opts.marker.size());
    if (new_word && !out.empty()) out += ' ';
    out.append(piece);
  }
  return out;
}

std::size_t token_count(Document& doc, const SubwordVocab& vocab) {
  const std::size_t n = tokenize(doc.text, vocab).size();
  doc.token_count = n;
  return n;
}

StageResult count_tokens(std::vector<Document> docs, const SubwordVocab& vocab, unsigned workers) {
  Stopwatch clock;
  parallel_for(docs.size(), workers, [&](std::size_t i) { token_count(docs[i], vocab); });
  StageResult result;
  std::size_t total = 0;
  for (const auto& d : docs) total += *d.token_count;
  result.stats = tally_stage("tokenize", docs, docs, {});
  result.stats.extras["tokens"] = total;
  result.kept = std::move(docs);
  result.stats.wall_time = clock.seconds();
  return result;
}

}  // namespace lvcorpus
