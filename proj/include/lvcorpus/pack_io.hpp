#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lvcorpus/masking.hpp"
#include "lvcorpus/packing.hpp"

namespace lvcorpus {

/// Binary window stream, all integers little-endian:
///
///   header   char[4] "LVPK", u32 version (1), u32 seq_len, u32 vocab_size
///   record   u16 tokens[seq_len]          (post-masking ids)
///            u32 pad_count
///            u32 n_segments, then n_segments x {u32 start, u32 end, u32 doc_index}
///            u32 n_masked,   then n_masked   x {u32 position, u16 original, u8 action}
///
/// action: 0 = <mask>, 1 = random token, 2 = unchanged. Records repeat to EOF.
/// A JSONL sidecar carries per-window metadata including document ids.
inline constexpr char kPackMagic[4] = {'L', 'V', 'P', 'K'};
inline constexpr std::uint32_t kPackVersion = 1;

struct PackRecord {
  PackedSequence window;  // tokens as stored (masked when a plan exists)
  MaskPlan plan;          // positions/originals/actions only
};

class PackWriter {
 public:
  /// Throws std::invalid_argument when vocab_size exceeds the u16 id range.
  PackWriter(const std::string& bin_path, const std::string& sidecar_path, std::uint32_t seq_len,
             std::uint32_t vocab_size);

  void write(const PackedSequence& window, const MaskedSequence* masked);
  void close();
  std::size_t records() const noexcept { return records_; }

 private:
  std::string bin_path_;
  std::ofstream bin_;
  std::ofstream sidecar_;
  std::uint32_t seq_len_;
  std::size_t records_ = 0;
};

struct PackFile {
  std::uint32_t seq_len = 0;
  std::uint32_t vocab_size = 0;
  std::vector<PackRecord> records;
};

PackFile read_pack_file(const std::string& bin_path);

}  // namespace lvcorpus
