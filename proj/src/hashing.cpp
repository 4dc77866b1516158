#include "lvcorpus/hashing.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "lvcorpus/error.hpp"

#define XXH_INLINE_ALL
#include <xxhash.h>

namespace lvcorpus {

std::string Hash128::hex() const {
  std::array<char, 33> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx%016llx",
                static_cast<unsigned long long>(high), static_cast<unsigned long long>(low));
  return std::string(buf.data(), 32);
}

Hash128 hash128(std::string_view bytes) {
  const XXH128_hash_t h = XXH3_128bits(bytes.data(), bytes.size());
  return Hash128{h.high64, h.low64};
}

std::uint64_t hash64(std::string_view bytes, std::uint64_t seed) {
  return XXH3_64bits_withSeed(bytes.data(), bytes.size(), seed);
}

std::uint64_t hash64(std::span<const std::uint64_t> words, std::uint64_t seed) {
  // Little-endian hosts only; the byte image is the in-memory layout.
  return XXH3_64bits_withSeed(words.data(), words.size_bytes(), seed);
}

Hash128 hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  XXH3_state_t* state = XXH3_createState();
  XXH3_128bits_reset(state);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) XXH3_128bits_update(state, buf.data(), static_cast<std::size_t>(got));
  }
  if (in.bad()) {
    XXH3_freeState(state);
    throw IoError("read failure on " + path);
  }
  const XXH128_hash_t h = XXH3_128bits_digest(state);
  XXH3_freeState(state);
  return Hash128{h.high64, h.low64};
}

}  // namespace lvcorpus
