#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lvcorpus/hashing.hpp"
#include "lvcorpus/jsonl.hpp"
#include "lvcorpus/text.hpp"

namespace fs = std::filesystem;

namespace lvtest {

namespace {

const std::vector<std::string> kNounStems = {
    "māj", "ciem", "skol", "darb", "gad", "lauk", "pilsēt", "val", "ģimen", "bērn", "upe",
    "mež", "ezer", "ceļ", "tirg", "baznīc", "grāmat", "dziesm", "vārd", "sēt", "dārz",
    "kok", "akmen", "saul", "mēnes", "zem", "jūr", "kaln", "pļav", "putn", "zivj", "sun",
    "kaķ", "zirg", "govs", "vīr", "siev", "meit", "dēl", "tēv", "māt", "draug", "kaimiņ",
    "skolotāj", "ārst", "zemniek", "zvejniek", "amatniek", "valdīb", "likum", "tiesīb",
    "naud", "maiz", "pien", "ūden", "vēstul", "stāst", "svētk", "rudens", "ziem", "pavasar"};
const std::vector<std::string> kNounEndings = {"s", "a", "am", "u", "ā", "i", "us", "iem", "ām", "e", "es", "ē"};
const std::vector<std::string> kVerbStems = {
    "strādāj", "dzīvoj", "redzēj", "runāj", "gāj", "nāc", "dzied", "las", "rakst", "mācīj",
    "zin", "dom", "saprot", "pērk", "pārdod", "būvēj", "audzēj", "ēd", "dzer", "guļ", "brauc",
    "stāv", "sēd", "meklēj", "atrod", "dod", "ņem", "nes", "ved", "sauc"};
const std::vector<std::string> kVerbEndings = {"a", "u", "i", "ām", "āt", "ēja", "ēs", "īs", "am", "at"};
const std::vector<std::string> kAdjStems = {
    "liel", "maz", "jaun", "vec", "lab", "slikt", "skaist", "garš", "īs", "balt", "meln",
    "zaļ", "zil", "sarkan", "silt", "auksts", "tīr", "priecīg", "klus", "stipr", "ātr", "lēn"};
const std::vector<std::string> kAdjEndings = {"ais", "ā", "o", "ajā", "ie", "ās", "s", "a", "ajam"};
const std::vector<std::string> kAdverbs = {
    "ļoti", "bieži", "reti", "šodien", "vakar", "rīt", "tagad", "vienmēr", "nekad", "šeit",
    "tur", "ātri", "lēni", "labi", "skaisti", "klusi", "kopā", "atkal", "jau", "vēl"};
const std::vector<std::string> kFunctionWords = {
    "un", "bet", "vai", "ka", "ar", "no", "uz", "par", "pie", "kā", "jo", "tad", "arī", "tikai", "pēc", "bez"};

std::vector<std::string> cross(const std::vector<std::string>& stems, const std::vector<std::string>& endings) {
  std::vector<std::string> out;
  for (const auto& s : stems) {
    for (const auto& e : endings) out.push_back(s + e);
  }
  return out;
}

// Distinct forms only, order kept, so the Zipf rank is stable.
std::vector<std::string> unique(std::vector<std::string> v) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (auto& w : v) {
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::string join(const std::vector<std::string>& words, const char* sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> out;
  for (auto w : lvcorpus::split_words(text)) out.emplace_back(w);
  return out;
}

}  // namespace

LatvianText::LatvianText(std::uint64_t seed) : rng_(seed) {
  nouns_ = unique(cross(kNounStems, kNounEndings));
  verbs_ = unique(cross(kVerbStems, kVerbEndings));
  adjectives_ = unique(cross(kAdjStems, kAdjEndings));
  adverbs_ = kAdverbs;
  function_words_ = kFunctionWords;
  // Shuffle once per generator so Zipf ranks differ across seeds.
  for (auto* v : {&nouns_, &verbs_, &adjectives_}) rng_.shuffle(v->begin(), v->end());
}

std::string LatvianText::pick(const std::vector<std::string>& v) {
  const double u = rng_.uniform();
  return v[static_cast<std::size_t>(u * u * static_cast<double>(v.size()))];
}

std::string LatvianText::word() {
  switch (rng_.below(5)) {
    case 0: return pick(nouns_);
    case 1: return pick(verbs_);
    case 2: return pick(adjectives_);
    case 3: return pick(adverbs_);
    default: return pick(function_words_);
  }
}

std::string LatvianText::sentence() {
  std::vector<std::string> w;
  switch (rng_.below(6)) {
    case 0: w = {pick(adjectives_), pick(nouns_), pick(verbs_), pick(nouns_)}; break;
    case 1: w = {pick(nouns_), pick(verbs_), pick(adverbs_)}; break;
    case 2: w = {pick(adjectives_), pick(nouns_), pick(verbs_), "pie", pick(adjectives_), pick(nouns_)}; break;
    case 3: w = {pick(nouns_), "un", pick(nouns_), pick(verbs_), pick(nouns_)}; break;
    case 4: w = {pick(adverbs_), pick(nouns_), pick(verbs_), pick(adjectives_), pick(nouns_)}; break;
    default:
      w = {pick(nouns_), pick(verbs_) + ",", "ka", pick(nouns_), pick(verbs_), pick(function_words_), pick(nouns_)};
      break;
  }
  if (rng_.below(3) == 0) {
    w.push_back(pick(function_words_));
    w.push_back(pick(nouns_));
  }
  if (!w[0].empty() && static_cast<unsigned char>(w[0][0]) < 0x80) {
    w[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0][0])));
  }
  return join(w) + ".";
}

std::string LatvianText::document(std::size_t min_words) {
  std::vector<std::string> paragraphs;
  std::size_t words = 0;
  while (words < min_words) {
    std::vector<std::string> sents;
    const std::size_t n = 3 + rng_.below(4);
    for (std::size_t i = 0; i < n && words < min_words; ++i) {
      sents.push_back(sentence());
      words += words_of(sents.back()).size();
    }
    paragraphs.push_back(join(sents));
  }
  return join(paragraphs, "\n\n");
}

std::string LatvianText::shuffle_words(const std::string& text) {
  auto w = words_of(text);
  rng_.shuffle(w.begin(), w.end());
  return join(w);
}

std::vector<std::string> LatvianText::lexicon() const {
  std::vector<std::string> all;
  for (const auto* v : {&nouns_, &verbs_, &adjectives_, &adverbs_, &function_words_}) {
    all.insert(all.end(), v->begin(), v->end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

std::string make_id(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", i);
  return prefix + buf;
}

Document make_doc(std::string id, std::string text, std::string source) {
  Document d;
  d.id = std::move(id);
  d.source = std::move(source);
  d.text = std::move(text);
  d.refresh_word_count();
  return d;
}

std::string edit_words(const std::string& text, double rate, LatvianText& gen) {
  auto w = words_of(text);
  std::vector<std::string> out;
  out.reserve(w.size() + 8);
  for (auto& word : w) {
    if (gen.rng().uniform() >= rate) {
      out.push_back(std::move(word));
      continue;
    }
    switch (gen.rng().below(3)) {
      case 0: out.push_back(gen.word()); break;                       // substitute
      case 1: out.push_back(std::move(word)); out.push_back(gen.word()); break;  // insert
      default: break;                                                  // delete
    }
  }
  return join(out);
}

PlantedCorpus near_duplicate_corpus(std::uint64_t seed, std::size_t n_docs) {
  LatvianText gen(seed);
  PlantedCorpus c;
  while (c.docs.size() < n_docs) {
    const std::size_t remaining = n_docs - c.docs.size();
    const std::string base = gen.document(150 + gen.rng().below(250));
    const bool grouped = gen.rng().below(2) == 0 && remaining >= 2;
    const std::size_t size = grouped ? std::min<std::size_t>(remaining, 2 + gen.rng().below(3)) : 1;
    std::vector<std::size_t> members;
    for (std::size_t m = 0; m < size; ++m) {
      std::string text = base;
      if (m > 0) {
        // Rates in [0, 0.16] give 5-gram Jaccard from 1.0 down to about 0.3.
        const double rate = gen.rng().below(8) == 0 ? 0.0 : 0.16 * gen.rng().uniform();
        text = edit_words(base, rate, gen);
      }
      members.push_back(c.docs.size());
      c.docs.push_back(make_doc(make_id("nd-", c.docs.size()), std::move(text)));
    }
    if (members.size() > 1) c.groups.push_back(std::move(members));
  }
  return c;
}

ExactPlanted exact_duplicate_corpus(std::uint64_t seed, std::size_t n_distinct) {
  LatvianText gen(seed);
  ExactPlanted c;
  std::vector<std::size_t> originals;
  for (std::size_t i = 0; i < n_distinct; ++i) {
    Document d = make_doc(make_id("ex-", i), gen.document(30 + gen.rng().below(60)), i % 2 ? "news" : "web");
    d.url = "https://www.example.lv/raksti/" + std::to_string(i);
    c.distinct_ids.push_back(d.id);
    c.docs.push_back(std::move(d));
  }
  const std::vector<std::string> url_variants = {"http://www.example.lv/raksti/", "HTTPS://WWW.EXAMPLE.LV/raksti/",
                                                 "https://www.example.lv/raksti/"};
  std::size_t next = n_distinct;
  for (std::size_t i = 0; i < n_distinct; i += 4) {
    const Document& orig = c.docs[i];
    // Text copy under a new id and URL, sometimes with whitespace noise.
    Document copy = orig;
    copy.id = make_id("ex-", next++);
    copy.url = "https://mirror.example.lv/copy/" + std::to_string(i);
    if (i % 8 == 0) {
      std::string noisy;
      for (char ch : copy.text) noisy += ch == ' ' ? std::string("  \t") : std::string(1, ch);
      copy.text = "  " + noisy + " \r\n";
    }
    c.duplicate_ids.push_back(copy.id);
    c.docs.push_back(copy);
    // URL variant with fresh text.
    Document moved = make_doc(make_id("ex-", next++), gen.document(40), orig.source);
    std::string url = url_variants[i % url_variants.size()] + std::to_string(i);
    if (i % 3 == 0) url += "/";
    if (i % 5 == 0) url += "?utm_source=feed";
    if (i % 7 == 0) url += "#comments";
    moved.url = url;
    c.duplicate_ids.push_back(moved.id);
    c.docs.push_back(std::move(moved));
  }
  // Interleave so copies do not always trail their originals.
  Rng rng(seed ^ 0x5eed);
  rng.shuffle(c.docs.begin() + static_cast<std::ptrdiff_t>(n_distinct), c.docs.end());
  return c;
}

lvcorpus::SubwordVocab make_vocab(const std::vector<std::string>& lexicon, std::size_t size) {
  std::vector<std::string> pieces = {"<pad>", "<unk>", "<s>", "</s>", "<mask>"};
  std::set<std::string> seen(pieces.begin(), pieces.end());
  auto add = [&](std::string p) {
    if (pieces.size() < size && seen.insert(p).second) pieces.push_back(std::move(p));
  };
  for (int b = 0; b < 256; ++b) add(std::string(1, static_cast<char>(b)));
  for (int b = 0; b < 256; ++b) add("##" + std::string(1, static_cast<char>(b)));
  for (const auto& w : lexicon) add(w);
  for (const auto* v : {&kNounEndings, &kVerbEndings, &kAdjEndings}) {
    for (const auto& e : *v) add("##" + e);
  }
  for (const auto& w : lexicon) {
    if (!w.empty() && static_cast<unsigned char>(w[0]) < 0x80) {
      add(std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])))) + w.substr(1));
    }
  }
  for (const char* p : {"##.", "##,", "Pie", "Un", "Ka"}) add(p);
  for (std::size_t i = 0; pieces.size() < size; ++i) add("##fill" + std::to_string(i));
  return lvcorpus::SubwordVocab::from_pieces(std::move(pieces), {size, lvcorpus::Continuation::wordpiece_prefix, "##"});
}

std::vector<std::size_t> lognormal_lengths(std::size_t n, double mu, double sigma, std::uint64_t seed,
                                           std::size_t min_len) {
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& len : out) {
    // Box-Muller on our own uniforms keeps this platform-independent.
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    len = std::max(min_len, static_cast<std::size_t>(std::llround(std::exp(mu + sigma * z))));
  }
  return out;
}

std::vector<lvcorpus::TokenId> random_tokens(std::size_t n, std::size_t vocab_size, Rng& rng) {
  std::vector<lvcorpus::TokenId> out(n);
  for (auto& t : out) t = static_cast<lvcorpus::TokenId>(5 + rng.below(vocab_size - 5));
  return out;
}

PipelineFixture write_pipeline_fixture(const std::string& dir, std::size_t n_docs, std::uint64_t seed) {
  fs::create_directories(dir);
  PipelineFixture f;
  f.input = (fs::path(dir) / "corpus.jsonl").string();
  f.train_corpus = (fs::path(dir) / "lm_train.jsonl").string();
  f.vocab = (fs::path(dir) / "vocab.txt").string();
  f.config = (fs::path(dir) / "pipeline.json").string();

  LatvianText gen(seed);
  const std::vector<std::string> sources = {"web", "news", "wiki"};
  std::vector<Document> docs;
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const std::string& source = sources[gen.rng().below(sources.size())];
    const std::uint64_t kind = gen.rng().below(100);
    Document d;
    if (kind < 4 && !docs.empty()) {
      d = docs[gen.rng().below(docs.size())];  // exact text copy
    } else if (kind < 8 && !docs.empty()) {
      const Document& base = docs[gen.rng().below(docs.size())];
      d = make_doc("", edit_words(base.text, 0.02, gen), source);  // near copy
    } else if (kind < 11) {
      d = make_doc("", gen.document(3 + gen.rng().below(10)), source);  // too short
    } else if (kind < 13) {
      std::string digits;
      for (int k = 0; k < 60; ++k) digits += std::to_string(gen.rng().below(100000)) + " ";
      d = make_doc("", digits, source);
    } else if (kind < 15) {
      d = make_doc("", "the quick brown fox jumps over the lazy dog and then some more english text follows "
                       "because this page was written in another language entirely " + std::to_string(i),
                   source);
    } else if (kind < 20) {
      std::string page = "Sākums | Jaunumi | Kontakti\n" + gen.document(80) + "\nSākums | Jaunumi | Kontakti\n" +
                         gen.document(40) + "\nSākums | Jaunumi | Kontakti";
      d = make_doc("", page, source);
    } else if (kind < 23) {
      d = make_doc("", gen.shuffle_words(gen.document(120)), source);  // word salad
    } else {
      const double u = gen.rng().uniform();
      d = make_doc("", gen.document(static_cast<std::size_t>(40 + 3000 * u * u * u)), source);
    }
    d.id = make_id(source + "-", i);
    d.source = source;
    if (gen.rng().below(2) == 0) d.url = "https://" + source + ".example.lv/p/" + std::to_string(i);
    if (kind >= 23 && kind < 25 && !docs.empty() && docs.back().url) d.url = docs.back().url;  // URL clash
    d.meta["crawl"] = "2023-" + std::to_string(1 + i % 12);
    docs.push_back(d);
  }
  {
    std::ofstream out(f.input, std::ios::binary);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      out << lvcorpus::serialize_document(docs[i]) << "\n";
      if (i == 17) out << "{\"id\": \"broken\", \"text\": \n";  // malformed line
      if (i == 42) out << "{\"source\": \"web\", \"text\": \"no id here\"}\n";
    }
  }

  LatvianText clean(seed + 1);
  std::vector<Document> train;
  for (std::size_t i = 0; i < 2000; ++i) train.push_back(make_doc(make_id("train-", i), clean.document(120), "train"));
  lvcorpus::write_jsonl(train, f.train_corpus);

  make_vocab(gen.lexicon()).save(f.vocab);

  nlohmann::ordered_json cfg;
  cfg["input"] = "corpus.jsonl";
  cfg["output_dir"] = "out";
  cfg["run_seed"] = 7;
  cfg["workers"] = 4;
  cfg["stages"] = nlohmann::ordered_json::array({
      {{"type", "filter"}},
      {{"type", "dedup-exact"}},
      {{"type", "dedup-near"}},
      {{"type", "lm-score"}, {"train_corpus", "lm_train.jsonl"}, {"policy", {{"percentile", 90}}}},
      {{"type", "tokenize"}, {"vocab", "vocab.txt"}},
      {{"type", "sample"}, {"scale", 400000}},
      {{"type", "pack"}, {"seq_len", 512}, {"mask", {{"preset", "span30"}}}},
  });
  std::ofstream(f.config, std::ios::binary) << cfg.dump(2) << "\n";
  return f;
}

std::vector<std::pair<std::string, std::string>> snapshot_dir(const std::string& dir,
                                                              const std::vector<std::string>& skip) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).string();
    if (std::find(skip.begin(), skip.end(), rel) != skip.end()) continue;
    out.emplace_back(rel, lvcorpus::hash_file(e.path().string()).hex());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace lvtest
