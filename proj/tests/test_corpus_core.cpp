#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lvcorpus/hashing.hpp"
#include "lvcorpus/jsonl.hpp"
#include "lvcorpus/rng.hpp"
#include "lvcorpus/text.hpp"
#include "synthetic.hpp"

using namespace lvcorpus;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(LVTEST_FIXTURES) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scratch(const std::string& name) {
  fs::create_directories(LVTEST_SCRATCH);
  return std::string(LVTEST_SCRATCH) + "/" + name;
}

}  // namespace

TEST_CASE("normalize_text collapses whitespace") {
  CHECK(normalize_text("a\t b\n") == "a b");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text("  x  ") == "x");
  CHECK(normalize_text("a  b") == "a b");
}

TEST_CASE("normalize_text composes to NFC") {
  // a + U+0304 COMBINING MACRON; Python unicodedata gives U+0101 (c4 81).
  CHECK(normalize_text("a\xCC\x84") == "\xC4\x81");
  CHECK(normalize_text("Ri\xCC\x84ga") == "R\xC4\xAB" "ga");
}

TEST_CASE("normalize_text keeps line structure") {
  CHECK(normalize_text("one \r\n two") == "one\ntwo");
  CHECK(normalize_text("p1\n\n\n\np2") == "p1\n\np2");
  CHECK(normalize_text("p1\n \t \np2") == "p1\n\np2");
  CHECK(normalize_text("\n\nbody\n\n") == "body");
}

TEST_CASE("normalize_text rejects ill-formed UTF-8") {
  CHECK_THROWS_AS(normalize_text("ok \xC3"), InvalidUtf8);
  CHECK(find_invalid_utf8("ab\xFF") == 2);
  CHECK(is_valid_utf8("R\xC4\xAB" "ga"));
  CHECK_FALSE(is_valid_utf8("\xED\xA0\x80"));  // surrogate
}

TEST_CASE("normalize_text is idempotent on random input") {
  Rng rng(11);
  const std::vector<std::string> atoms = {"a", "ā", "a\xCC\x84", " ", "\t", "\n", "\r\n", " ", "Ž", "z\xCC\x8C", "1", ".", "  \n \n"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const auto n = rng.below(40);
    for (std::uint64_t i = 0; i < n; ++i) s += atoms[rng.below(atoms.size())];
    const std::string once = normalize_text(s);
    CHECK(normalize_text(once) == once);
    CHECK(word_count(once) == word_count(s));
  }
}

TEST_CASE("word_count") {
  CHECK(word_count("Rīga ir galvaspilsēta") == 3);
  CHECK(word_count("") == 0);
  CHECK(word_count(" \n\t ") == 0);
  // Independent count: python3 -c "print(len(open(f).read().split()))" gives 57.
  CHECK(word_count(slurp(fixture("latvian_paragraph.txt"))) == 57);
}

TEST_CASE("to_lower handles Latvian capitals") {
  CHECK(to_lower("RĪGA Ēdiens Ž") == "rīga ēdiens ž");
  CHECK(codepoint_count("rīga") == 4);
}

TEST_CASE("read_jsonl keeps file order") {
  const ReadResult r = read_jsonl(fixture("three_docs.jsonl"));
  REQUIRE(r.docs.size() == 3);
  CHECK(r.diagnostics.empty());
  CHECK(r.docs[0].id == "lv-001");
  CHECK(r.docs[1].id == "lv-002");
  CHECK(r.docs[2].id == "lv-003");
  CHECK(r.docs[0].url == std::optional<std::string>("https://www.delfi.lv/zinas/1"));
  CHECK_FALSE(r.docs[1].url.has_value());
  CHECK(r.docs[0].meta.at("crawl") == "2023-06");
  CHECK(r.docs[2].source == "wiki");
  CHECK(r.docs[0].word_count == 9);
}

TEST_CASE("a malformed line is skipped with a diagnostic") {
  const ReadResult r = read_jsonl(fixture("ten_lines_one_bad.jsonl"));
  CHECK(r.docs.size() == 9);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].line == 7);
  CHECK(r.diagnostics[0].reason == "malformed_json");
}

TEST_CASE("write(read(f)) reproduces the canonical fixture byte for byte") {
  const std::string out = scratch("roundtrip.jsonl");
  write_jsonl(read_jsonl(fixture("three_docs.jsonl")).docs, out);
  CHECK(slurp(out) == slurp(fixture("three_docs.jsonl")));
}

TEST_CASE("schema violations name their reason") {
  std::string reason;
  CHECK_FALSE(parse_document(R"({"text":"x"})", reason));
  CHECK(reason == "missing_id");
  CHECK_FALSE(parse_document(R"({"id":"a"})", reason));
  CHECK(reason == "missing_text");
  CHECK_FALSE(parse_document("{\"id\":\"a\",\"text\":\"\xFF\"}", reason));
  CHECK(reason == "invalid_utf8");
  CHECK_FALSE(parse_document("[1,2]", reason));
  CHECK(reason == "malformed_json");
}

TEST_CASE("duplicate ids are diagnosed") {
  const std::string path = scratch("dupe_ids.jsonl");
  std::ofstream(path) << R"({"id":"x","text":"a"})" "\n" R"({"id":"x","text":"b"})" "\n";
  const ReadResult r = read_jsonl(path);
  CHECK(r.docs.size() == 1);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].reason == "duplicate_id");
  CHECK(r.diagnostics[0].line == 2);
}

TEST_CASE("derived fields travel through meta") {
  Document d = lvtest::make_doc("t1", "vārds vārds");
  d.token_count = 4;
  d.perplexity = 12.5;
  std::string reason;
  const auto back = parse_document(serialize_document(d), reason);
  REQUIRE(back);
  CHECK(back->token_count == std::optional<std::size_t>(4));
  CHECK(back->perplexity == std::optional<double>(12.5));
  CHECK(back->meta.empty());
  CHECK(*back == d);
}

TEST_CASE("rejects round-trip") {
  Reject r;
  r.id = "a";
  r.stage = "dedup-near";
  r.reason = "near_dup";
  r.source = "web";
  r.words = 42;
  r.kept = "b";
  const Reject back = parse_reject(serialize_reject(r));
  CHECK(back.id == "a");
  CHECK(back.kept == std::optional<std::string>("b"));
  CHECK(back.words == 42);
  CHECK_FALSE(back.line.has_value());
}

TEST_CASE("hashes match the reference xxHash") {
  // Values from the Python xxhash package.
  CHECK(hash128("Rīga ir Latvijas galvaspilsēta un lielākā pilsēta Baltijas valstīs.").hex() ==
        "6b44d6999f72a59e4cb3864ef9749461");
  CHECK(hash_file(fixture("three_docs.jsonl")).hex() == "9d3268bb280f17b18a929ef5242e1493");
  CHECK(hash64("a b c d e") == 8105845647759474906ULL);
}

TEST_CASE("Rng is reproducible and in range") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  Rng c(9);
  for (int i = 0; i < 10000; ++i) {
    CHECK(c.below(7) < 7);
    const double u = c.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}
