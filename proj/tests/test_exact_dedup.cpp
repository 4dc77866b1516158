#include <doctest.h>

#include <algorithm>
#include <set>

#include "lvcorpus/exact_dedup.hpp"
#include "lvcorpus/jsonl.hpp"
#include "lvcorpus/text.hpp"
#include "synthetic.hpp"

using namespace lvcorpus;
using lvtest::make_doc;

namespace {

std::vector<std::string> ids(const std::vector<Document>& docs) {
  std::vector<std::string> out;
  for (const auto& d : docs) out.push_back(d.id);
  return out;
}

}  // namespace

TEST_CASE("tab and space variants share a text hash after normalization") {
  const Document a = make_doc("a", normalize_text("Rīga\tir galvaspilsēta"));
  const Document b = make_doc("b", normalize_text("Rīga ir galvaspilsēta"));
  CHECK(exact_key(a).text_hash == exact_key(b).text_hash);
}

TEST_CASE("URL canonicalization") {
  CHECK(canonical_url("http://a.lv/x?utm=1") == canonical_url("https://A.lv/x/"));
  CHECK(canonical_url("https://A.lv/x/") == std::optional<std::string>("a.lv/x"));
  CHECK(canonical_url("https://a.lv/x#frag") == canonical_url("a.lv/x"));
  CHECK(canonical_url("https://a.lv/x") != canonical_url("https://a.lv/y"));
  CHECK_FALSE(canonical_url("").has_value());
}

TEST_CASE("fixture document digest is frozen") {
  const ReadResult r = read_jsonl(std::string(LVTEST_FIXTURES) + "/three_docs.jsonl");
  // xxh3_128 of the text bytes, from the Python xxhash package.
  CHECK(exact_key(r.docs[0]).text_hash.hex() == "6b44d6999f72a59e4cb3864ef9749461");
}

TEST_CASE("[A, A, B] keeps A and B") {
  const std::vector<Document> docs = {make_doc("1", "pirmais teksts"), make_doc("2", "pirmais teksts"),
                                      make_doc("3", "otrais teksts")};
  const StageResult r = dedup_exact(docs);
  CHECK(ids(r.kept) == std::vector<std::string>{"1", "3"});
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].id == "2");
  CHECK(r.rejects[0].reason == "exact_text");
  CHECK(r.rejects[0].kept == std::optional<std::string>("1"));
}

TEST_CASE("distinct documents pass through unchanged") {
  lvtest::LatvianText gen(2);
  std::vector<Document> docs;
  for (int i = 0; i < 50; ++i) docs.push_back(make_doc(lvtest::make_id("d", i), gen.document(30)));
  const StageResult r = dedup_exact(docs);
  CHECK(r.kept == docs);
  CHECK(r.rejects.empty());
}

TEST_CASE("URL duplicates are removed by default and can be disabled") {
  Document a = make_doc("a", "viens teksts");
  Document b = make_doc("b", "cits teksts");
  a.url = "https://lv.lv/p";
  b.url = "http://LV.lv/p/?ref=x";
  CHECK(dedup_exact({a, b}).rejects.at(0).reason == "exact_url");
  ExactDedupConfig cfg;
  cfg.metadata_fields.clear();
  CHECK(dedup_exact({a, b}, cfg).rejects.empty());
}

TEST_CASE("metadata fields beyond url") {
  Document a = make_doc("a", "viens");
  Document b = make_doc("b", "divi");
  a.meta["isbn"] = "123";
  b.meta["isbn"] = "123";
  ExactDedupConfig cfg;
  cfg.metadata_fields = {"isbn"};
  const StageResult r = dedup_exact({a, b}, cfg);
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].reason == "exact_meta:isbn");
}

TEST_CASE("10k documents with 500 planted copies lose exactly 500") {
  lvtest::LatvianText gen(77);
  std::vector<Document> docs;
  for (int i = 0; i < 9500; ++i) {
    Document d = make_doc(lvtest::make_id("o", i), gen.document(20) + " " + std::to_string(i));
    d.url = "https://example.lv/o/" + std::to_string(i);
    docs.push_back(std::move(d));
  }
  for (int i = 0; i < 500; ++i) {
    Document copy = docs[static_cast<std::size_t>(i * 19)];
    copy.id = lvtest::make_id("c", i);
    copy.url.reset();
    docs.push_back(std::move(copy));
  }
  lvcorpus::Rng rng(1);
  rng.shuffle(docs.begin(), docs.end());
  ExactDedupConfig cfg;
  cfg.workers = 4;
  const StageResult r = dedup_exact(docs, cfg);
  CHECK(r.rejects.size() == 500);
  CHECK(r.kept.size() == 9500);
  CHECK(r.stats.docs_in == 10000);
}

TEST_CASE("dedup_exact is idempotent and worker-independent") {
  const auto planted = lvtest::exact_duplicate_corpus(5, 120);
  std::vector<Document> docs = planted.docs;
  for (auto& d : docs) {
    d.text = normalize_text(d.text);
    d.refresh_word_count();
  }
  const StageResult once = dedup_exact(docs);
  CHECK(dedup_exact(once.kept).rejects.empty());
  ExactDedupConfig cfg;
  cfg.workers = 8;
  CHECK(dedup_exact(docs, cfg).kept == once.kept);
}
