#include "lvcorpus/packing.hpp"

#include <stdexcept>

namespace lvcorpus {

std::vector<std::int32_t> PackedSequence::attention_segments() const {
  std::vector<std::int32_t> seg(tokens.size(), -1);
  for (std::size_t s = 0; s < doc_boundaries.size(); ++s) {
    for (std::size_t p = doc_boundaries[s].start; p < doc_boundaries[s].end; ++p) {
      seg[p] = static_cast<std::int32_t>(s);
    }
  }
  return seg;
}

PackConfig PackConfig::for_vocab(const SubwordVocab& vocab, std::size_t seq_len) {
  PackConfig cfg;
  cfg.seq_len = seq_len;
  cfg.bos = vocab.specials().bos;
  cfg.eos = vocab.specials().eos;
  cfg.pad = vocab.specials().pad;
  return cfg;
}

GreedyPacker::GreedyPacker(PackConfig cfg) : cfg_(cfg) {
  if (cfg_.seq_len < 2) throw std::invalid_argument("seq_len must be >= 2");
}

void GreedyPacker::close_window() {
  if (open_.tokens.empty()) return;
  open_.pad_count = cfg_.seq_len - open_.tokens.size();
  open_.tokens.resize(cfg_.seq_len, cfg_.pad);
  done_.push_back(std::move(open_));
  open_ = PackedSequence{};
  ++windows_emitted_;
}

void GreedyPacker::append(std::span<const TokenId> piece, std::size_t doc_index,
                          const std::string& id) {
  while (!piece.empty()) {
    const std::size_t room = cfg_.seq_len - open_.tokens.size();
    const std::size_t take = std::min(room, piece.size());
    const std::size_t start = open_.tokens.size();
    open_.tokens.insert(open_.tokens.end(), piece.begin(), piece.begin() + take);
    open_.doc_boundaries.push_back({start, start + take, doc_index, id});
    real_tokens_ += take;
    piece = piece.subspan(take);
    if (open_.tokens.size() == cfg_.seq_len) close_window();
  }
}

void GreedyPacker::add(const TokenizedDoc& doc) {
  std::vector<TokenId> piece;
  piece.reserve(doc.tokens.size() + 2);
  if (cfg_.wrap_specials) piece.push_back(cfg_.bos);
  piece.insert(piece.end(), doc.tokens.begin(), doc.tokens.end());
  if (cfg_.wrap_specials) piece.push_back(cfg_.eos);
  const std::size_t index = docs_seen_++;
  if (piece.empty()) return;

  if (!cfg_.split_documents) {
    const std::size_t room = cfg_.seq_len - open_.tokens.size();
    // A document that does not fit starts a fresh window; one longer than a
    // window is chunked from a fresh window.
    if (piece.size() > room) close_window();
  }
  append(piece, index, doc.id);
}

void GreedyPacker::finish() { close_window(); }

std::vector<PackedSequence> GreedyPacker::take() {
  std::vector<PackedSequence> out;
  out.swap(done_);
  return out;
}

PackResult pack_greedy(std::span<const TokenizedDoc> docs, const PackConfig& cfg) {
  GreedyPacker packer(cfg);
  for (const auto& d : docs) packer.add(d);
  packer.finish();
  PackResult result;
  result.windows = packer.take();
  if (packer.window_tokens() > 0) {
    result.efficiency =
        static_cast<double>(packer.real_tokens()) / static_cast<double>(packer.window_tokens());
  }
  return result;
}

}  // namespace lvcorpus
