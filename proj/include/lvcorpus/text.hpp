#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lvcorpus/error.hpp"

namespace lvcorpus {

class InvalidUtf8 : public Error {
 public:
  explicit InvalidUtf8(std::size_t offset);

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Byte offset of the first ill-formed sequence, or npos when valid.
std::size_t find_invalid_utf8(std::string_view bytes);
inline bool is_valid_utf8(std::string_view bytes) {
  return find_invalid_utf8(bytes) == std::string_view::npos;
}

/// NFC, horizontal whitespace runs collapsed to one space, lines trimmed,
/// blank-line runs collapsed to a single blank line, ends trimmed.
/// Line breaks survive as '\n' so line-based stages still see lines.
/// Throws InvalidUtf8.
std::string normalize_text(std::string_view text);

/// Number of maximal runs of non-White_Space code points.
std::size_t word_count(std::string_view text);

/// Whitespace-delimited words as views into `text`.
std::vector<std::string_view> split_words(std::string_view text);

/// Lines split on '\n' (a trailing '\n' does not produce an empty line).
std::vector<std::string_view> split_lines(std::string_view text);

/// Full Unicode lowercase mapping, root locale.
std::string to_lower(std::string_view text);

/// Number of code points; text must be valid UTF-8.
std::size_t codepoint_count(std::string_view text);

}  // namespace lvcorpus
