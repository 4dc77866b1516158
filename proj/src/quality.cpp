#include "lvcorpus/quality.hpp"

#include <unordered_set>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "lvcorpus/text.hpp"

namespace lvcorpus {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_fraction(std::vector<Issue>& out, const std::string& path, double v) {
  if (!(v >= 0.0 && v <= 1.0)) out.push_back({path, "must lie in [0, 1]"});
}

}  // namespace

std::vector<Issue> HeuristicConfig::violations(const std::string& prefix) const {
  std::vector<Issue> out;
  if (min_words > max_words) {
    out.push_back({prefix + ".min_words", "must not exceed max_words"});
  }
  check_fraction(out, prefix + ".min_alpha_ratio", min_alpha_ratio);
  check_fraction(out, prefix + ".max_digit_ratio", max_digit_ratio);
  check_fraction(out, prefix + ".min_latvian_char_ratio", min_latvian_char_ratio);
  check_fraction(out, prefix + ".max_repeated_line_ratio", max_repeated_line_ratio);
  return out;
}

double TextProfile::alpha_ratio() const { return ratio(alpha_chars, non_space_chars); }
double TextProfile::digit_ratio() const { return ratio(digit_chars, non_space_chars); }
double TextProfile::latvian_ratio() const { return ratio(latvian_chars, alpha_chars); }
double TextProfile::repeated_line_ratio() const { return ratio(repeated_lines, lines); }

bool is_latvian_diacritic(char32_t c) {
  switch (c) {
    case U'ā': case U'Ā': case U'č': case U'Č': case U'ē': case U'Ē':
    case U'ģ': case U'Ģ': case U'ī': case U'Ī': case U'ķ': case U'Ķ':
    case U'ļ': case U'Ļ': case U'ņ': case U'Ņ': case U'š': case U'Š':
    case U'ū': case U'Ū': case U'ž': case U'Ž':
      return true;
    default:
      return false;
  }
}

TextProfile profile_text(std::string_view text) {
  TextProfile p;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto n = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(bytes, i, n, c);
    if (c < 0 || u_isUWhiteSpace(c)) continue;
    ++p.non_space_chars;
    if (u_isUAlphabetic(c)) {
      ++p.alpha_chars;
      if (is_latvian_diacritic(static_cast<char32_t>(c))) ++p.latvian_chars;
    } else if (u_isdigit(c)) {
      ++p.digit_chars;
    }
  }
  std::unordered_set<std::string_view> seen;
  for (const auto line : split_lines(text)) {
    if (line.empty()) continue;
    ++p.lines;
    if (!seen.insert(line).second) ++p.repeated_lines;
  }
  return p;
}

std::string strip_boilerplate_text(std::string_view text) {
  std::unordered_set<std::string_view> seen;
  std::string out;
  out.reserve(text.size());
  bool blank_pending = false;
  for (const auto line : split_lines(text)) {
    if (line.empty()) {
      blank_pending = !out.empty();
      continue;
    }
    const bool first = seen.insert(line).second;
    if (!first && codepoint_count(line) <= kBoilerplateMaxLineChars) continue;
    if (!out.empty()) out += blank_pending ? "\n\n" : "\n";
    out.append(line);
    blank_pending = false;
  }
  return out;
}

Document strip_boilerplate(Document doc) {
  doc.text = strip_boilerplate_text(doc.text);
  doc.refresh_word_count();
  return doc;
}

QualityVerdict apply_heuristics(const Document& doc, const HeuristicConfig& cfg) {
  if (doc.word_count < cfg.min_words) return QualityVerdict::reject("too_short");
  if (doc.word_count > cfg.max_words) return QualityVerdict::reject("too_long");
  const TextProfile p = profile_text(doc.text);
  if (p.alpha_ratio() < cfg.min_alpha_ratio) return QualityVerdict::reject("alpha_ratio");
  if (p.digit_ratio() > cfg.max_digit_ratio) return QualityVerdict::reject("digit_ratio");
  if (p.latvian_ratio() < cfg.min_latvian_char_ratio) {
    return QualityVerdict::reject("latvian_ratio");
  }
  if (p.repeated_line_ratio() > cfg.max_repeated_line_ratio) {
    return QualityVerdict::reject("repeated_lines");
  }
  return QualityVerdict::accept();
}

StageResult filter_quality(std::vector<Document> docs, const QualityFilterConfig& cfg) {
  Stopwatch clock;
  StageResult result;
  result.kept.reserve(docs.size());
  std::map<std::string, std::size_t> trimmed;
  for (const auto& d : docs) {
    Document cleaned = cfg.strip_boilerplate ? strip_boilerplate(d) : d;
    const QualityVerdict v = apply_heuristics(cleaned, cfg.heuristics);
    if (v.keep) {
      if (cleaned.word_count != d.word_count) {
        trimmed[d.source] += d.word_count - cleaned.word_count;
      }
      result.kept.push_back(std::move(cleaned));
    } else {
      result.rejects.push_back(make_reject(d, "filter", v.reason));
    }
  }
  result.stats = tally_stage("filter", docs, result.kept, result.rejects);
  result.stats.words_trimmed = std::move(trimmed);
  result.stats.wall_time = clock.seconds();
  return result;
}

}  // namespace lvcorpus
