#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "kn_oracle.hpp"
#include "lvcorpus/ngram_lm.hpp"
#include "synthetic.hpp"

using namespace lvcorpus;

namespace {

std::vector<std::vector<std::string>> repeat(const std::vector<std::string>& s, int n) {
  return std::vector<std::vector<std::string>>(static_cast<std::size_t>(n), s);
}

NgramModel::TrainOptions opts(std::size_t order, std::size_t min_count = 2) {
  NgramModel::TrainOptions o;
  o.order = order;
  o.min_count = min_count;
  return o;
}

std::vector<WordId> ids(const NgramModel& m, const std::vector<std::string>& words) {
  std::vector<WordId> out;
  for (const auto& w : words) out.push_back(w == "<s>" ? NgramModel::kBos : m.id_of(w));
  return out;
}

std::vector<std::vector<std::string>> toy_corpus(std::uint64_t seed, std::size_t docs) {
  lvtest::LatvianText gen(seed);
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < docs; ++i) {
    for (auto& s : lm_sentences(gen.document(60))) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("hand-computed probability on the two-word corpus") {
  // <s> a b </s> three times, order 5. p(b | <s> a) unrolls to
  // 5/6 + 1/6 * (1/2 + 1/2 * (1/6 + 1/8)) = 271/288 with every discount 0.5.
  const auto sents = repeat({"a", "b"}, 3);
  const NgramModel m = NgramModel::train_sentences(sents, opts(5));
  const auto h = ids(m, {"<s>", "a"});
  CHECK(m.prob(h, m.id_of("b")) == doctest::Approx(271.0 / 288.0).epsilon(1e-12));
  for (std::size_t o = 1; o <= 5; ++o) CHECK(m.discount(o) == 0.5);
  const oracle::KneserNey ref(sents, 5, 2);
  CHECK(ref.prob({"<s>", "a"}, "b") == doctest::Approx(271.0 / 288.0).epsilon(1e-12));
}

TEST_CASE("unseen in-vocabulary word in a seen context has positive mass") {
  const std::vector<std::vector<std::string>> sents = {{"a", "b"}, {"a", "b"}, {"c", "c"}};
  const NgramModel m = NgramModel::train_sentences(sents, opts(3));
  CHECK(m.prob(ids(m, {"<s>", "a"}), m.id_of("c")) > 0.0);
  CHECK(m.prob(ids(m, {"<s>", "a"}), NgramModel::kUnk) > 0.0);
}

TEST_CASE("conditional distributions sum to one") {
  const auto sents = toy_corpus(1, 80);
  const NgramModel m = NgramModel::train_sentences(sents, opts(4));
  Rng rng(2);
  for (std::size_t ord = 1; ord <= 4; ++ord) {
    const auto ctxs = m.contexts(ord);
    for (int t = 0; t < 25; ++t) {
      const auto& ctx = ctxs[rng.below(ctxs.size())];
      double sum = 0;
      for (WordId w = 0; w < m.vocab_size(); ++w) {
        if (w != NgramModel::kBos) sum += m.prob(ctx, w);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  // An unseen history backs off fully and still normalizes.
  double sum = 0;
  const std::vector<WordId> nowhere = {NgramModel::kUnk, NgramModel::kUnk, NgramModel::kUnk};
  for (WordId w = 0; w < m.vocab_size(); ++w) {
    if (w != NgramModel::kBos) sum += m.prob(nowhere, w);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("per-token probabilities match the reference implementation") {
  const auto train = toy_corpus(3, 60);
  const auto test = toy_corpus(4, 10);
  for (std::size_t order : {1, 2, 3, 5}) {
    const NgramModel m = NgramModel::train_sentences(train, opts(order));
    const oracle::KneserNey ref(train, order, 2);
    REQUIRE(ref.vocab_size() == m.vocab_size());
    for (std::size_t o = 1; o <= order; ++o) CHECK(m.discount(o) == doctest::Approx(ref.discount(o)).epsilon(1e-12));
    for (const auto& s : test) {
      const auto encoded = m.encode(s);
      std::vector<std::string> hist = {"<s>"};
      for (std::size_t i = 1; i < encoded.size(); ++i) {
        const std::string w = i + 1 == encoded.size() ? "</s>" : ref.map(s[i - 1]);
        const double ours = m.log_prob(std::span<const WordId>(encoded.data(), i), encoded[i]);
        const double theirs = std::log(ref.prob(hist, w));
        CHECK(ours == doctest::Approx(theirs).epsilon(1e-9));
        hist.push_back(w);
      }
    }
  }
}

TEST_CASE("a uniform unigram model has perplexity equal to its outcome count") {
  // Three words and <unk> (from singletons) and </s>, each with count 4.
  std::vector<std::vector<std::string>> sents;
  for (int i = 0; i < 4; ++i) sents.push_back({"x", "y", "once" + std::to_string(i)});
  const NgramModel m = NgramModel::train_sentences(sents, opts(1));
  REQUIRE(m.predictable_size() == 4);
  for (const char* text : {"x y", "y y y x zzz", "nekas"}) {
    const auto v = perplexity(m, lvtest::make_doc("d", text));
    CHECK(v.perplexity == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("training text scores better than random words") {
  lvtest::LatvianText gen(5);
  const std::string text = gen.document(80);
  const NgramModel m = NgramModel::train(std::vector<Document>{lvtest::make_doc("t", text)}, opts(3, 1));
  const double fit = perplexity(m, lvtest::make_doc("a", text)).perplexity;
  const double noise = perplexity(m, lvtest::make_doc("b", gen.shuffle_words(text))).perplexity;
  CHECK(fit < noise);
}

TEST_CASE("a fixture document agrees with the reference perplexity") {
  const auto train = toy_corpus(6, 100);
  const NgramModel m = NgramModel::train_sentences(train, opts(5));
  const oracle::KneserNey ref(train, 5, 2);
  lvtest::LatvianText gen(7);
  const Document doc = lvtest::make_doc("f", gen.document(120));
  double lp = 0;
  std::size_t n = 0;
  for (const auto& s : lm_sentences(doc.text)) {
    std::vector<std::string> hist = {"<s>"};
    for (std::size_t i = 0; i <= s.size(); ++i) {
      const std::string w = i == s.size() ? "</s>" : ref.map(s[i]);
      lp += std::log(ref.prob(hist, w));
      hist.push_back(w);
      ++n;
    }
  }
  const auto v = perplexity(m, doc);
  CHECK(v.n_scored_tokens == n);
  CHECK(v.perplexity == doctest::Approx(std::exp(-lp / static_cast<double>(n))).epsilon(1e-6));
}

TEST_CASE("save and load reproduce the model exactly") {
  const auto train = toy_corpus(8, 40);
  const NgramModel m = NgramModel::train_sentences(train, opts(4));
  std::filesystem::create_directories(LVTEST_SCRATCH);
  const std::string path = std::string(LVTEST_SCRATCH) + "/toy.kn";
  m.save(path);
  const NgramModel back = NgramModel::load(path);
  CHECK(back.vocab_size() == m.vocab_size());
  for (const auto& s : toy_corpus(9, 3)) {
    const auto e = m.encode(s);
    for (std::size_t i = 1; i < e.size(); ++i) {
      CHECK(back.prob(std::span<const WordId>(e.data(), i), e[i]) == m.prob(std::span<const WordId>(e.data(), i), e[i]));
    }
  }
}

TEST_CASE("literal sentence markers in text are unknown words") {
  const NgramModel m = NgramModel::train_sentences(repeat({"a", "b"}, 3), opts(2));
  CHECK(m.id_of("<s>") == NgramModel::kUnk);
  CHECK(m.id_of("</s>") == NgramModel::kUnk);
  CHECK(m.id_of("never") == NgramModel::kUnk);
}

TEST_CASE("perplexity filtering policies") {
  lvtest::LatvianText gen(10);
  std::vector<Document> train, docs;
  for (int i = 0; i < 100; ++i) train.push_back(lvtest::make_doc(lvtest::make_id("t", i), gen.document(80)));
  for (int i = 0; i < 30; ++i) docs.push_back(lvtest::make_doc(lvtest::make_id("d", i), gen.document(40)));
  docs.push_back(lvtest::make_doc("empty", ""));
  const NgramModel m = NgramModel::train(train, opts(3));

  const auto all = filter_by_perplexity(docs, m, PerplexityPolicy::absolute(std::numeric_limits<double>::infinity()));
  CHECK(all.kept.size() == docs.size() - 1);
  REQUIRE(all.rejects.size() == 1);
  CHECK(all.rejects[0].reason == "empty");

  const auto min_only = filter_by_perplexity(docs, m, PerplexityPolicy::percentile(0));
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& v : min_only.verdicts) {
    if (v.n_scored_tokens) lowest = std::min(lowest, v.perplexity);
  }
  for (const auto& d : min_only.kept) CHECK(*d.perplexity == lowest);
  CHECK(min_only.kept.size() >= 1);
  CHECK(min_only.cutoff == lowest);

  const auto half = filter_by_perplexity(docs, m, PerplexityPolicy::percentile(50), 4);
  CHECK(half.kept.size() == 15);  // nearest rank ceil(0.5 * 30)
  for (const auto& r : half.rejects) CHECK((r.reason == "high_ppl" || r.reason == "empty"));
}
