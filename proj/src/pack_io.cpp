#include "lvcorpus/pack_io.hpp"

#include <cstring>
#include <stdexcept>

#include <json.hpp>

#include "lvcorpus/error.hpp"

namespace lvcorpus {

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
  v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
  return true;
}

}  // namespace

PackWriter::PackWriter(const std::string& bin_path, const std::string& sidecar_path,
                       std::uint32_t seq_len, std::uint32_t vocab_size)
    : bin_path_(bin_path), bin_(bin_path, std::ios::binary), sidecar_(sidecar_path, std::ios::binary),
      seq_len_(seq_len) {
  if (vocab_size > 65'536) throw std::invalid_argument("vocabulary too large for u16 token ids");
  if (!bin_) throw IoError("cannot open " + bin_path + " for writing");
  if (!sidecar_) throw IoError("cannot open " + sidecar_path + " for writing");
  bin_.write(kPackMagic, 4);
  put<std::uint32_t>(bin_, kPackVersion);
  put<std::uint32_t>(bin_, seq_len);
  put<std::uint32_t>(bin_, vocab_size);
}

void PackWriter::write(const PackedSequence& window, const MaskedSequence* masked) {
  if (window.tokens.size() != seq_len_) throw std::invalid_argument("window length != seq_len");
  const auto& tokens = masked ? masked->tokens : window.tokens;
  for (const TokenId t : tokens) put<std::uint16_t>(bin_, static_cast<std::uint16_t>(t));
  put<std::uint32_t>(bin_, static_cast<std::uint32_t>(window.pad_count));
  put<std::uint32_t>(bin_, static_cast<std::uint32_t>(window.doc_boundaries.size()));
  for (const auto& s : window.doc_boundaries) {
    put<std::uint32_t>(bin_, static_cast<std::uint32_t>(s.start));
    put<std::uint32_t>(bin_, static_cast<std::uint32_t>(s.end));
    put<std::uint32_t>(bin_, static_cast<std::uint32_t>(s.doc_index));
  }
  const std::size_t n_masked = masked ? masked->plan.positions.size() : 0;
  put<std::uint32_t>(bin_, static_cast<std::uint32_t>(n_masked));
  for (std::size_t k = 0; k < n_masked; ++k) {
    put<std::uint32_t>(bin_, masked->plan.positions[k]);
    put<std::uint16_t>(bin_, static_cast<std::uint16_t>(masked->plan.originals[k]));
    put<std::uint8_t>(bin_, static_cast<std::uint8_t>(masked->plan.actions[k]));
  }
  if (!bin_) throw IoError("write failure on " + bin_path_);

  nlohmann::ordered_json j;
  j["window"] = records_;
  j["pad_count"] = window.pad_count;
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : window.doc_boundaries) {
    segs.push_back({{"start", s.start}, {"end", s.end}, {"doc_id", s.doc_id}});
  }
  j["segments"] = std::move(segs);
  j["masked"] = n_masked;
  sidecar_ << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  ++records_;
}

void PackWriter::close() {
  bin_.flush();
  sidecar_.flush();
  if (!bin_ || !sidecar_) throw IoError("flush failure on " + bin_path_);
  bin_.close();
  sidecar_.close();
}

PackFile read_pack_file(const std::string& bin_path) {
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + bin_path + " for reading");
  char magic[4];
  std::uint32_t version = 0;
  PackFile f;
  if (!in.read(magic, 4) || std::memcmp(magic, kPackMagic, 4) != 0 || !get(in, version) ||
      version != kPackVersion || !get(in, f.seq_len) || !get(in, f.vocab_size)) {
    throw FormatError(bin_path + ": bad pack header");
  }
  auto corrupt = [&] { throw FormatError(bin_path + ": truncated record " + std::to_string(f.records.size())); };
  while (in.peek() != std::char_traits<char>::eof()) {
    PackRecord rec;
    rec.window.tokens.resize(f.seq_len);
    for (auto& t : rec.window.tokens) {
      std::uint16_t v = 0;
      if (!get(in, v)) corrupt();
      t = v;
    }
    std::uint32_t pad = 0, n = 0;
    if (!get(in, pad) || !get(in, n)) corrupt();
    rec.window.pad_count = pad;
    for (std::uint32_t k = 0; k < n; ++k) {
      std::uint32_t s = 0, e = 0, d = 0;
      if (!get(in, s) || !get(in, e) || !get(in, d)) corrupt();
      rec.window.doc_boundaries.push_back({s, e, d, {}});
    }
    if (!get(in, n)) corrupt();
    for (std::uint32_t k = 0; k < n; ++k) {
      std::uint32_t pos = 0;
      std::uint16_t orig = 0;
      std::uint8_t act = 0;
      if (!get(in, pos) || !get(in, orig) || !get(in, act) || act > 2) corrupt();
      rec.plan.positions.push_back(pos);
      rec.plan.originals.push_back(orig);
      rec.plan.actions.push_back(static_cast<MaskAction>(act));
    }
    f.records.push_back(std::move(rec));
  }
  return f;
}

}  // namespace lvcorpus
