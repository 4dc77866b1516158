#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lvcorpus/document.hpp"
#include "lvcorpus/error.hpp"

namespace lvcorpus {

struct HeuristicConfig {
  std::size_t min_words = 20;
  std::size_t max_words = 1'000'000;
  double min_alpha_ratio = 0.6;         // alphabetic / non-whitespace chars
  double max_digit_ratio = 0.3;         // digits / non-whitespace chars
  double min_latvian_char_ratio = 0.005;  // Latvian diacritic letters / alphabetic chars
  double max_repeated_line_ratio = 0.3;   // repeated non-empty lines / non-empty lines

  std::vector<Issue> violations(const std::string& prefix = "heuristics") const;
};

/// Character and line statistics the heuristics are computed from.
struct TextProfile {
  std::size_t non_space_chars = 0;
  std::size_t alpha_chars = 0;
  std::size_t digit_chars = 0;
  std::size_t latvian_chars = 0;
  std::size_t lines = 0;           // non-empty
  std::size_t repeated_lines = 0;  // non-empty occurrences beyond the first

  double alpha_ratio() const;
  double digit_ratio() const;
  double latvian_ratio() const;
  double repeated_line_ratio() const;
};

TextProfile profile_text(std::string_view text);

/// One of ā č ē ģ ī ķ ļ ņ š ū ž or their capitals.
bool is_latvian_diacritic(char32_t c);

/// Lines of at most this many code points are deduplicated within a document.
inline constexpr std::size_t kBoilerplateMaxLineChars = 80;

std::string strip_boilerplate_text(std::string_view text);

/// Drops repeated short lines after their first occurrence; word_count recomputed.
Document strip_boilerplate(Document doc);

struct QualityVerdict {
  bool keep = true;
  std::string reason;  // too_short | too_long | alpha_ratio | digit_ratio | latvian_ratio | repeated_lines

  static QualityVerdict accept() { return {}; }
  static QualityVerdict reject(std::string why) { return {false, std::move(why)}; }
};

/// First violated rule in the fixed order length, alpha, digit, Latvian, repeated lines.
QualityVerdict apply_heuristics(const Document& doc, const HeuristicConfig& cfg);

struct QualityFilterConfig {
  HeuristicConfig heuristics;
  bool strip_boilerplate = true;
};

/// Stage "filter": optional boilerplate stripping, then heuristics.
StageResult filter_quality(std::vector<Document> docs, const QualityFilterConfig& cfg);

}  // namespace lvcorpus
