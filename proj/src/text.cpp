#include "lvcorpus/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace lvcorpus {

namespace {

bool is_line_break(UChar32 c) {
  return c == '\n' || c == '\r' || c == 0x0B || c == 0x0C || c == 0x85 || c == 0x2028 ||
         c == 0x2029;
}

bool is_space(UChar32 c) {
  if (c < 0x80) return c == ' ' || (c >= 0x09 && c <= 0x0D);
  return u_isUWhiteSpace(c);
}

template <typename Visit>
void for_each_codepoint(std::string_view s, Visit&& visit) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < n) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(p, i, n, c);
    visit(c, static_cast<std::size_t>(start), static_cast<std::size_t>(i));
  }
}

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (norm->isNormalized(src, status) && U_SUCCESS(status)) return std::string(text);
  status = U_ZERO_ERROR;
  const icu::UnicodeString out = norm->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

}  // namespace

InvalidUtf8::InvalidUtf8(std::size_t offset)
    : Error("invalid UTF-8 at byte " + std::to_string(offset)), offset_(offset) {}

std::size_t find_invalid_utf8(std::string_view bytes) {
  std::size_t bad = std::string_view::npos;
  for_each_codepoint(bytes, [&](UChar32 c, std::size_t start, std::size_t) {
    if (c < 0 && bad == std::string_view::npos) bad = start;
  });
  return bad;
}

std::string normalize_text(std::string_view text) {
  if (const auto bad = find_invalid_utf8(text); bad != std::string_view::npos) {
    throw InvalidUtf8(bad);
  }
  const std::string composed = nfc(text);

  std::string out;
  out.reserve(composed.size());
  std::size_t pending_breaks = 0;  // line breaks seen since the last word
  bool pending_space = false;
  bool crlf = false;
  for_each_codepoint(composed, [&](UChar32 c, std::size_t start, std::size_t end) {
    if (is_line_break(c)) {
      if (!(crlf && c == '\n')) ++pending_breaks;
      crlf = (c == '\r');
      pending_space = false;
      return;
    }
    crlf = false;
    if (is_space(c)) {
      pending_space = true;
      return;
    }
    if (!out.empty()) {
      if (pending_breaks >= 2) {
        out += "\n\n";
      } else if (pending_breaks == 1) {
        out += '\n';
      } else if (pending_space) {
        out += ' ';
      }
    }
    pending_breaks = 0;
    pending_space = false;
    out.append(composed, start, end - start);
  });
  return out;
}

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for_each_codepoint(text, [&](UChar32 c, std::size_t, std::size_t) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  });
  return count;
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t word_start = std::string_view::npos;
  for_each_codepoint(text, [&](UChar32 c, std::size_t start, std::size_t) {
    if (is_space(c)) {
      if (word_start != std::string_view::npos) {
        words.push_back(text.substr(word_start, start - word_start));
        word_start = std::string_view::npos;
      }
    } else if (word_start == std::string_view::npos) {
      word_start = start;
    }
  });
  if (word_start != std::string_view::npos) words.push_back(text.substr(word_start));
  return words;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string to_lower(std::string_view text) {
  bool ascii = true;
  for (const char ch : text) {
    if (static_cast<unsigned char>(ch) >= 0x80) {
      ascii = false;
      break;
    }
  }
  if (ascii) {
    std::string out(text);
    for (char& ch : out) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
  }
  auto s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s.toLower(icu::Locale::getRoot());
  std::string out;
  s.toUTF8String(out);
  return out;
}

std::size_t codepoint_count(std::string_view text) {
  std::size_t n = 0;
  for (const char ch : text) {
    if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace lvcorpus
