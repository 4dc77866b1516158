#include "lvcorpus/ngram_lm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lvcorpus/error.hpp"
#include "lvcorpus/hashing.hpp"
#include "lvcorpus/parallel.hpp"
#include "lvcorpus/text.hpp"

namespace lvcorpus {

Gram::Gram(std::span<const WordId> s) {
  if (s.size() > kMaxNgramOrder) throw std::invalid_argument("n-gram longer than kMaxNgramOrder");
  std::copy(s.begin(), s.end(), ids.begin());
  len = static_cast<std::uint8_t>(s.size());
}

bool Gram::operator==(const Gram& o) const noexcept {
  return len == o.len && std::equal(ids.begin(), ids.begin() + len, o.ids.begin());
}

bool Gram::operator<(const Gram& o) const noexcept {
  return std::lexicographical_compare(ids.begin(), ids.begin() + len, o.ids.begin(),
                                      o.ids.begin() + o.len);
}

std::size_t GramHash::operator()(const Gram& g) const noexcept {
  return static_cast<std::size_t>(
      hash64(std::string_view(reinterpret_cast<const char*>(g.ids.data()), g.len * sizeof(WordId)),
             g.len));
}

std::vector<std::vector<std::string>> lm_sentences(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  const std::string lowered = to_lower(text);
  for (const auto line : split_lines(lowered)) {
    auto words = split_words(line);
    if (words.empty()) continue;
    out.emplace_back(words.begin(), words.end());
  }
  return out;
}

namespace {

constexpr const char* kSpecials[] = {"<unk>", "<s>", "</s>"};

using CountTable = std::unordered_map<Gram, std::uint64_t, GramHash>;

// Raw counts of every n-gram (orders 1..N) ending at each predicted position.
void count_sentence(std::span<const WordId> sent, std::size_t order, std::vector<CountTable>& raw) {
  for (std::size_t i = 1; i < sent.size(); ++i) {
    const std::size_t max_o = std::min(order, i + 1);
    for (std::size_t o = 1; o <= max_o; ++o) {
      ++raw[o - 1][Gram(sent.subspan(i + 1 - o, o))];
    }
  }
}

std::string format_hex_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, r.ptr);
}

double parse_hex_double(const std::string& s) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw FormatError("bad discount value '" + s + "'");
  }
  return v;
}

}  // namespace

NgramModel NgramModel::train(const std::vector<Document>& corpus, const TrainOptions& opts) {
  std::vector<std::vector<std::vector<std::string>>> per_doc(corpus.size());
  parallel_for(corpus.size(), opts.workers,
               [&](std::size_t i) { per_doc[i] = lm_sentences(corpus[i].text); });
  std::vector<std::vector<std::string>> sentences;
  for (auto& d : per_doc) {
    for (auto& s : d) sentences.push_back(std::move(s));
  }
  return train_sentences(sentences, opts);
}

NgramModel NgramModel::train_sentences(const std::vector<std::vector<std::string>>& sentences,
                                       const TrainOptions& opts) {
  if (opts.order < 1 || opts.order > kMaxNgramOrder) {
    throw std::invalid_argument("order must be in [1, " + std::to_string(kMaxNgramOrder) + "]");
  }
  std::unordered_map<std::string, std::uint64_t> freq;
  std::size_t n_words = 0;
  for (const auto& s : sentences) {
    for (const auto& w : s) {
      ++freq[w];
      ++n_words;
    }
  }
  if (n_words == 0) throw std::invalid_argument("training corpus has no tokens");

  NgramModel m;
  m.order_ = opts.order;
  m.min_count_ = opts.min_count;
  std::vector<std::string> kept;
  for (const auto& [w, c] : freq) {
    if (c >= opts.min_count && w != "<unk>" && w != "<s>" && w != "</s>") kept.push_back(w);
  }
  std::sort(kept.begin(), kept.end());
  for (const char* s : kSpecials) m.words_.emplace_back(s);
  for (auto& w : kept) m.words_.push_back(std::move(w));
  for (WordId id = 0; id < m.words_.size(); ++id) m.index_.emplace(m.words_[id], id);

  // Count shards independently, then merge; sums make the merge order-free.
  const unsigned shards = std::max(1u, opts.workers);
  std::vector<std::vector<CountTable>> partial(shards, std::vector<CountTable>(m.order_));
  const std::size_t per = (sentences.size() + shards - 1) / shards;
  parallel_for(shards, shards, [&](std::size_t s) {
    std::vector<WordId> ids;
    const std::size_t end = std::min(sentences.size(), (s + 1) * per);
    for (std::size_t k = s * per; k < end; ++k) {
      ids = m.encode(sentences[k]);
      count_sentence(ids, m.order_, partial[s]);
    }
  });
  std::vector<CountTable> raw(m.order_);
  for (auto& shard : partial) {
    for (std::size_t o = 0; o < m.order_; ++o) {
      for (const auto& [g, c] : shard[o]) raw[o][g] += c;
    }
  }
  m.total_tokens_ = n_words + sentences.size();

  m.counts_.assign(m.order_, {});
  m.counts_[m.order_ - 1] = raw[m.order_ - 1];
  for (std::size_t o = 1; o < m.order_; ++o) {
    auto& adjusted = m.counts_[o - 1];
    for (const auto& [g, c] : raw[o - 1]) {
      if (g.ids[0] == kBos) adjusted[g] = c;
    }
    for (const auto& [g, c] : raw[o]) {
      // Suffix of an (o+1)-gram; a suffix never starts with <s>.
      Gram suffix(g.view().subspan(1));
      ++adjusted[suffix];
    }
  }

  m.discounts_.assign(m.order_, opts.fallback_discount);
  for (std::size_t o = 0; o < m.order_; ++o) {
    std::uint64_t n1 = 0, n2 = 0;
    for (const auto& [g, c] : m.counts_[o]) {
      n1 += c == 1;
      n2 += c == 2;
    }
    if (n1 > 0 && n2 > 0) {
      m.discounts_[o] = static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
    }
  }
  m.rebuild_contexts();
  return m;
}

void NgramModel::rebuild_contexts() {
  context_stats_.assign(order_, {});
  for (std::size_t o = 0; o < order_; ++o) {
    for (const auto& [g, c] : counts_[o]) {
      auto& st = context_stats_[o][Gram(g.view().first(g.len - 1))];
      st.total += c;
      ++st.types;
    }
  }
}

WordId NgramModel::id_of(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  // Literal "<s>" / "</s>" in text are ordinary unknown words.
  return it == index_.end() || it->second <= kEos ? kUnk : it->second;
}

std::vector<WordId> NgramModel::encode(const std::vector<std::string>& sentence) const {
  std::vector<WordId> ids;
  ids.reserve(sentence.size() + 2);
  ids.push_back(kBos);
  for (const auto& w : sentence) ids.push_back(id_of(w));
  ids.push_back(kEos);
  return ids;
}

std::uint64_t NgramModel::adjusted_count(std::span<const WordId> gram) const {
  if (gram.empty() || gram.size() > order_) return 0;
  const auto& table = counts_[gram.size() - 1];
  const auto it = table.find(Gram(gram));
  return it == table.end() ? 0 : it->second;
}

double NgramModel::prob(std::span<const WordId> history, WordId w) const {
  if (history.size() >= order_) history = history.last(order_ - 1);
  std::array<WordId, kMaxNgramOrder> buf{};

  double p = 1.0 / static_cast<double>(predictable_size());
  for (std::size_t o = 1; o <= std::min(order_, history.size() + 1); ++o) {
    const auto ctx = history.last(o - 1);
    const auto st = context_stats_[o - 1].find(Gram(ctx));
    if (st == context_stats_[o - 1].end()) break;  // longer contexts are unseen too
    std::copy(ctx.begin(), ctx.end(), buf.begin());
    buf[o - 1] = w;
    const auto c = counts_[o - 1].find(Gram(std::span<const WordId>(buf.data(), o)));
    const double count = c == counts_[o - 1].end() ? 0.0 : static_cast<double>(c->second);
    const double d = discounts_[o - 1];
    const double total = static_cast<double>(st->second.total);
    p = std::max(count - d, 0.0) / total +
        d * static_cast<double>(st->second.types) / total * p;
  }
  return p;
}

double NgramModel::log_prob(std::span<const WordId> history, WordId w) const {
  return std::log(prob(history, w));
}

std::vector<std::vector<WordId>> NgramModel::contexts(std::size_t ord) const {
  std::vector<Gram> keys;
  for (const auto& [g, st] : context_stats_.at(ord - 1)) keys.push_back(g);
  std::sort(keys.begin(), keys.end());
  std::vector<std::vector<WordId>> out;
  out.reserve(keys.size());
  for (const auto& g : keys) out.emplace_back(g.view().begin(), g.view().end());
  return out;
}

// Text format:
//   lvcorpus-kn 1
//   order N / min_count C / total_tokens T
//   vocab V, then V words one per line (id = position)
//   discount o <hexfloat>      (one line per order)
//   ngrams o K, then K lines "id id ... count" sorted by ids
//   end
void NgramModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "lvcorpus-kn 1\n";
  out << "order " << order_ << "\nmin_count " << min_count_ << "\ntotal_tokens " << total_tokens_
      << "\n";
  out << "vocab " << words_.size() << "\n";
  for (const auto& w : words_) out << w << "\n";
  for (std::size_t o = 1; o <= order_; ++o) {
    out << "discount " << o << " " << format_hex_double(discounts_[o - 1]) << "\n";
  }
  for (std::size_t o = 1; o <= order_; ++o) {
    std::vector<std::pair<Gram, std::uint64_t>> rows(counts_[o - 1].begin(), counts_[o - 1].end());
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out << "ngrams " << o << " " << rows.size() << "\n";
    for (const auto& [g, c] : rows) {
      for (const WordId id : g.view()) out << id << ' ';
      out << c << "\n";
    }
  }
  out << "end\n";
  if (!out) throw IoError("write failure on " + path);
}

NgramModel NgramModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      throw FormatError(path + ": unexpected end of file after line " + std::to_string(line_no));
    }
    ++line_no;
    return line;
  };
  auto fail = [&](const std::string& what) {
    throw FormatError(path + ":" + std::to_string(line_no) + ": " + what);
  };
  auto keyed = [&](const std::string& key) {
    std::istringstream ss(next_line());
    std::string k;
    std::uint64_t v = 0;
    if (!(ss >> k >> v) || k != key) fail("expected '" + key + "'");
    return v;
  };

  if (next_line() != "lvcorpus-kn 1") fail("not a lvcorpus-kn v1 model");
  NgramModel m;
  m.order_ = keyed("order");
  if (m.order_ < 1 || m.order_ > kMaxNgramOrder) fail("order out of range");
  m.min_count_ = keyed("min_count");
  m.total_tokens_ = keyed("total_tokens");
  const std::uint64_t v = keyed("vocab");
  if (v < 3) fail("vocabulary lacks specials");
  for (std::uint64_t i = 0; i < v; ++i) {
    m.words_.push_back(next_line());
    if (!m.index_.emplace(m.words_.back(), static_cast<WordId>(i)).second) fail("duplicate word");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (m.words_[i] != kSpecials[i]) fail("special tokens out of place");
  }
  m.discounts_.resize(m.order_);
  for (std::size_t o = 1; o <= m.order_; ++o) {
    std::istringstream ss(next_line());
    std::string k, value;
    std::size_t ord = 0;
    if (!(ss >> k >> ord >> value) || k != "discount" || ord != o) fail("expected discount");
    m.discounts_[o - 1] = parse_hex_double(value);
  }
  m.counts_.assign(m.order_, {});
  for (std::size_t o = 1; o <= m.order_; ++o) {
    std::istringstream ss(next_line());
    std::string k;
    std::size_t ord = 0, rows = 0;
    if (!(ss >> k >> ord >> rows) || k != "ngrams" || ord != o) fail("expected ngrams header");
    auto& table = m.counts_[o - 1];
    table.reserve(rows);
    std::array<WordId, kMaxNgramOrder> ids{};
    for (std::size_t r = 0; r < rows; ++r) {
      std::istringstream row(next_line());
      for (std::size_t i = 0; i < o; ++i) {
        if (!(row >> ids[i]) || ids[i] >= v) fail("bad n-gram id");
      }
      std::uint64_t c = 0;
      if (!(row >> c) || c == 0) fail("bad n-gram count");
      table[Gram(std::span<const WordId>(ids.data(), o))] = c;
    }
  }
  if (next_line() != "end") fail("expected 'end'");
  m.rebuild_contexts();
  return m;
}

PerplexityVerdict perplexity(const NgramModel& model, const Document& doc) {
  PerplexityVerdict v;
  v.doc_id = doc.id;
  for (const auto& sentence : lm_sentences(doc.text)) {
    const auto ids = model.encode(sentence);
    for (std::size_t i = 1; i < ids.size(); ++i) {
      v.log_prob += model.log_prob(std::span<const WordId>(ids.data(), i), ids[i]);
      ++v.n_scored_tokens;
    }
  }
  if (v.n_scored_tokens == 0) {
    v.kept = false;
    v.reason = "empty";
    return v;
  }
  v.perplexity = std::exp(-v.log_prob / static_cast<double>(v.n_scored_tokens));
  v.kept = true;
  return v;
}

PerplexityFilterResult filter_by_perplexity(std::vector<Document> docs, const NgramModel& model,
                                            const PerplexityPolicy& policy, unsigned workers) {
  Stopwatch clock;
  PerplexityFilterResult result;
  result.verdicts.resize(docs.size());
  parallel_for(docs.size(), workers,
               [&](std::size_t i) { result.verdicts[i] = perplexity(model, docs[i]); });

  std::vector<double> scores;
  for (const auto& v : result.verdicts) {
    if (v.n_scored_tokens > 0) scores.push_back(v.perplexity);
  }
  if (policy.kind == PerplexityPolicy::Kind::absolute) {
    result.cutoff = policy.value;
  } else if (scores.empty()) {
    result.cutoff = std::numeric_limits<double>::infinity();
  } else {
    if (!(policy.value >= 0.0 && policy.value <= 100.0)) {
      throw std::invalid_argument("percentile must lie in [0, 100]");
    }
    std::sort(scores.begin(), scores.end());
    auto rank = static_cast<std::size_t>(
        std::ceil(policy.value / 100.0 * static_cast<double>(scores.size())));
    rank = std::clamp<std::size_t>(rank, 1, scores.size());
    result.cutoff = scores[rank - 1];
  }

  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto& v = result.verdicts[i];
    if (v.n_scored_tokens > 0) {
      docs[i].perplexity = v.perplexity;
      v.kept = v.perplexity <= result.cutoff;
      if (!v.kept) v.reason = "high_ppl";
    }
    if (v.kept) {
      result.kept.push_back(docs[i]);
    } else {
      result.rejects.push_back(make_reject(docs[i], "lm-score", v.reason));
    }
  }
  result.stats = tally_stage("lm-score", docs, result.kept, result.rejects);
  result.stats.extras["policy"] =
      policy.kind == PerplexityPolicy::Kind::absolute ? "absolute" : "percentile";
  result.stats.extras["policy_value"] = policy.value;
  if (std::isfinite(result.cutoff)) {
    result.stats.extras["cutoff"] = result.cutoff;
  } else {
    result.stats.extras["cutoff"] = "inf";
  }
  result.stats.wall_time = clock.seconds();
  return result;
}

}  // namespace lvcorpus
