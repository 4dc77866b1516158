#include <doctest.h>

#include <fstream>
#include <sstream>

#include "lvcorpus/quality.hpp"
#include "lvcorpus/text.hpp"
#include "synthetic.hpp"

using namespace lvcorpus;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(LVTEST_FIXTURES) + "/" + name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("repeated short lines keep their first occurrence") {
  std::string text = "Cookie notice\n";
  for (int i = 0; i < 4; ++i) text += "Raksts turpinās šeit ar jaunu rindu " + std::to_string(i) + "\nCookie notice\n";
  const std::string out = strip_boilerplate_text(normalize_text(text));
  std::size_t count = 0;
  for (auto line : split_lines(out)) count += line == "Cookie notice";
  CHECK(count == 1);
  CHECK(out.rfind("Cookie notice", 0) == 0);
}

TEST_CASE("text without repeated lines is unchanged") {
  const std::string text = normalize_text(slurp("latvian_paragraph.txt"));
  CHECK(strip_boilerplate_text(text) == text);
}

TEST_CASE("long repeated lines are content, not boilerplate") {
  const std::string line(kBoilerplateMaxLineChars + 1, 'a');
  const std::string text = line + "\n" + line;
  CHECK(strip_boilerplate_text(text) == text);
}

TEST_CASE("crawl page strips to the hand-cleaned golden") {
  const std::string page = normalize_text(slurp("crawl_page.txt"));
  CHECK(strip_boilerplate_text(page) == slurp("crawl_page.golden.txt"));
}

TEST_CASE("strip_boilerplate is idempotent") {
  lvtest::LatvianText gen(3);
  for (int i = 0; i < 50; ++i) {
    std::string page;
    for (int k = 0; k < 8; ++k) page += (gen.rng().below(2) ? std::string("Izvēlne") : gen.sentence()) + "\n";
    const std::string once = strip_boilerplate_text(normalize_text(page));
    CHECK(strip_boilerplate_text(once) == once);
  }
}

TEST_CASE("heuristics reject for the named reason") {
  HeuristicConfig cfg;
  cfg.min_words = 10;
  CHECK(apply_heuristics(lvtest::make_doc("a", "trīs mazi vārdi"), cfg).reason == "too_short");

  HeuristicConfig digits;
  digits.min_words = 1;
  const auto v = apply_heuristics(lvtest::make_doc("b", "āboli 123"), digits);
  CHECK_FALSE(v.keep);
  CHECK(v.reason == "digit_ratio");

  HeuristicConfig small;
  small.min_words = 1;
  small.max_words = 3;
  CHECK(apply_heuristics(lvtest::make_doc("c", "viens divi trīs četri"), small).reason == "too_long");

  HeuristicConfig any;
  any.min_words = 1;
  CHECK(apply_heuristics(lvtest::make_doc("d", "-- ** -- ** ++ @@ ## a"), any).reason == "alpha_ratio");
  CHECK(apply_heuristics(lvtest::make_doc("e", "the cat sat on the mat"), any).reason == "latvian_ratio");
  CHECK(apply_heuristics(lvtest::make_doc("f", "rīta zēns\nrīta zēns\nrīta zēns"), any).reason == "repeated_lines");
}

TEST_CASE("fluent Latvian paragraph passes the defaults") {
  const Document d = lvtest::make_doc("lv", normalize_text(slurp("latvian_paragraph.txt")));
  const TextProfile p = profile_text(d.text);
  // Hand counts (Python str.isalpha / isdigit over the fixture).
  CHECK(p.non_space_chars == 323);
  CHECK(p.alpha_chars == 306);
  CHECK(p.digit_chars == 4);
  CHECK(p.latvian_chars == 17);
  CHECK(p.lines == 4);
  CHECK(p.repeated_lines == 0);
  CHECK(apply_heuristics(d, HeuristicConfig{}).keep);
}

TEST_CASE("heuristic config validation lists every bad field") {
  HeuristicConfig cfg;
  cfg.min_alpha_ratio = 1.5;
  cfg.max_digit_ratio = -0.1;
  cfg.min_words = 10;
  cfg.max_words = 5;
  CHECK(cfg.violations().size() >= 3);
  CHECK(HeuristicConfig{}.violations().empty());
}

TEST_CASE("filter_quality conserves words per source") {
  lvtest::LatvianText gen(8);
  std::vector<Document> docs;
  for (int i = 0; i < 200; ++i) {
    std::string text = gen.document(5 + gen.rng().below(60));
    if (i % 5 == 0) text = "Izvēlne\n" + text + "\nIzvēlne\nIzvēlne";
    if (i % 7 == 0) text = "12345 67890 " + text.substr(0, text.find(' ', 20));
    docs.push_back(lvtest::make_doc(lvtest::make_id("q", i), normalize_text(text), i % 2 ? "web" : "news"));
  }
  const StageResult r = filter_quality(docs, QualityFilterConfig{});
  CHECK(r.kept.size() + r.rejects.size() == docs.size());
  for (const auto& [src, in] : r.stats.per_source_in) {
    const auto out = r.stats.per_source_out.count(src) ? r.stats.per_source_out.at(src) : SourceTally{};
    const auto rej = r.stats.per_source_rejected.count(src) ? r.stats.per_source_rejected.at(src) : SourceTally{};
    const std::size_t trimmed = r.stats.words_trimmed.count(src) ? r.stats.words_trimmed.at(src) : 0;
    CHECK(in.docs == out.docs + rej.docs);
    CHECK(in.words == out.words + rej.words + trimmed);
  }
  CHECK_FALSE(r.stats.words_trimmed.empty());
  for (const auto& rej : r.rejects) CHECK(rej.stage == "filter");
}
