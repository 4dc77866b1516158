#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace lvcorpus {

struct Hash128 {
  std::uint64_t high = 0;
  std::uint64_t low = 0;

  auto operator<=>(const Hash128&) const = default;

  /// 32 lowercase hex digits, high word first (XXH128 canonical form).
  std::string hex() const;
};

/// Seedless XXH3-128 digest of raw bytes.
Hash128 hash128(std::string_view bytes);

std::uint64_t hash64(std::string_view bytes, std::uint64_t seed = 0);
std::uint64_t hash64(std::span<const std::uint64_t> words, std::uint64_t seed = 0);

/// Digest of a whole file, streamed.
Hash128 hash_file(const std::string& path);

struct Hash128Hasher {
  std::size_t operator()(const Hash128& h) const noexcept {
    return static_cast<std::size_t>(h.low ^ (h.high * 0x9E3779B97F4A7C15ULL));
  }
};

}  // namespace lvcorpus
