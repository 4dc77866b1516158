#include "lvcorpus/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lvcorpus/hashing.hpp"
#include "lvcorpus/jsonl.hpp"
#include "lvcorpus/pack_io.hpp"
#include "lvcorpus/parallel.hpp"
#include "lvcorpus/rng.hpp"
#include "lvcorpus/text.hpp"

namespace fs = std::filesystem;

namespace lvcorpus {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config parsing

namespace {

class FieldReader {
 public:
  FieldReader(const json& obj, std::string path, std::vector<Issue>& issues)
      : obj_(obj), path_(std::move(path)), issues_(issues) {
    if (!obj_.is_object()) {
      issues_.push_back({path_, "must be an object"});
      valid_ = false;
    }
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return valid_ && obj_.contains(key); }

  const json* raw(const std::string& key) {
    used_.insert(key);
    if (!valid_) return nullptr;
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if constexpr (std::is_same_v<T, bool>) {
      if (v->is_boolean()) return v->get<bool>();
      return bad(key, "must be a boolean", fallback);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (v->is_string()) return v->get<std::string>();
      return bad(key, "must be a string", fallback);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (v->is_number()) return v->get<T>();
      return bad(key, "must be a number", fallback);
    } else if constexpr (std::is_integral_v<T>) {
      if (v->is_number_unsigned()) return v->get<T>();
      if (v->is_number_integer() && v->get<long long>() >= 0) return v->get<T>();
      return bad(key, "must be a non-negative integer", fallback);
    } else {
      static_assert(std::is_same_v<T, std::vector<std::string>>);
      if (v->is_array() && std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_string(); })) {
        return v->get<T>();
      }
      return bad(key, "must be an array of strings", fallback);
    }
  }

  void issue(const std::string& key, std::string message) {
    issues_.push_back({at(key), std::move(message)});
  }

  void finish() {
    if (!valid_) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) issues_.push_back({at(key), "unknown field"});
    }
  }

 private:
  template <typename T>
  T bad(const std::string& key, const char* message, T fallback) {
    issues_.push_back({at(key), message});
    return fallback;
  }

  const json& obj_;
  std::string path_;
  std::vector<Issue>& issues_;
  std::set<std::string> used_;
  bool valid_ = true;
};

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

void require_file(FieldReader& r, const std::string& key, const std::string& resolved,
                  std::vector<Issue>& issues) {
  if (!fs::is_regular_file(resolved)) issues.push_back({r.at(key), "file not found: " + resolved});
}

void check_unit(FieldReader& r, const std::string& key, double v, bool open_low, bool open_high) {
  const bool ok = (open_low ? v > 0.0 : v >= 0.0) && (open_high ? v < 1.0 : v <= 1.0);
  if (!ok) {
    r.issue(key, std::string("must lie in ") + (open_low ? "(" : "[") + "0, 1" + (open_high ? ")" : "]"));
  }
}

VocabOptions parse_vocab_options(FieldReader& r) {
  VocabOptions v;
  const std::size_t size = r.get<std::size_t>("vocab_size", kDefaultVocabSize);
  if (size > 0) v.expected_size = size;
  const std::string style = r.get<std::string>("continuation", "wordpiece");
  if (style == "wordpiece") {
    v.continuation = Continuation::wordpiece_prefix;
    v.marker = "##";
  } else if (style == "word_start") {
    v.continuation = Continuation::word_start_marker;
    v.marker = "\xC4\xA0";  // U+0120
  } else {
    r.issue("continuation", "must be \"wordpiece\" or \"word_start\"");
  }
  v.marker = r.get<std::string>("marker", v.marker);
  if (v.marker.empty()) r.issue("marker", "must be non-empty");
  return v;
}

std::optional<MaskConfig> parse_mask(const json& obj, const std::string& path,
                                     std::vector<Issue>& issues) {
  FieldReader r(obj, path, issues);
  MaskConfig m;
  const std::string preset = r.get<std::string>("preset", "");
  if (preset == "span30") {
    m = MaskConfig::span_30();
  } else if (preset == "rtd20") {
    m = MaskConfig::rtd_generator_20();
  } else if (preset == "decay15") {
    m = MaskConfig::decay_15();
  } else if (!preset.empty()) {
    r.issue("preset", "must be one of span30, rtd20, decay15");
  }
  const std::string scheme = r.get<std::string>("scheme", m.scheme == MaskScheme::span ? "span" : "token");
  if (scheme == "span") {
    m.scheme = MaskScheme::span;
  } else if (scheme == "token") {
    m.scheme = MaskScheme::token;
  } else {
    r.issue("scheme", "must be \"span\" or \"token\"");
  }
  m.rate = r.get<double>("rate", m.rate);
  check_unit(r, "rate", m.rate, true, true);
  m.geom_p = r.get<double>("geom_p", m.geom_p);
  check_unit(r, "geom_p", m.geom_p, true, true);
  m.max_span = r.get<std::size_t>("max_span", m.max_span);
  if (m.max_span < 1) r.issue("max_span", "must be >= 1");
  m.mask_prob = r.get<double>("mask_prob", m.mask_prob);
  m.random_prob = r.get<double>("random_prob", m.random_prob);
  check_unit(r, "mask_prob", m.mask_prob, false, false);
  check_unit(r, "random_prob", m.random_prob, false, false);
  if (m.mask_prob + m.random_prob > 1.0 + 1e-12) r.issue("random_prob", "mask_prob + random_prob must not exceed 1");
  r.finish();
  return m;
}

}  // namespace

std::string stage_type(const StageConfig& stage) {
  struct Visitor {
    std::string operator()(const FilterStage&) const { return "filter"; }
    std::string operator()(const ExactDedupStage&) const { return "dedup-exact"; }
    std::string operator()(const NearDedupStage&) const { return "dedup-near"; }
    std::string operator()(const LmScoreStage&) const { return "lm-score"; }
    std::string operator()(const TokenizeStage&) const { return "tokenize"; }
    std::string operator()(const SampleStage&) const { return "sample"; }
    std::string operator()(const PackStage&) const { return "pack"; }
  };
  return std::visit(Visitor{}, stage);
}

StageConfig parse_stage(const json& obj, const std::string& path, const std::string& base_dir,
                        std::vector<Issue>& issues) {
  FieldReader r(obj, path, issues);
  const std::string type = r.get<std::string>("type", "");
  StageConfig out = FilterStage{};

  if (type == "filter") {
    FilterStage s;
    s.config.strip_boilerplate = r.get<bool>("strip_boilerplate", true);
    if (const json* h = r.raw("heuristics")) {
      FieldReader hr(*h, r.at("heuristics"), issues);
      auto& c = s.config.heuristics;
      c.min_words = hr.get<std::size_t>("min_words", c.min_words);
      c.max_words = hr.get<std::size_t>("max_words", c.max_words);
      c.min_alpha_ratio = hr.get<double>("min_alpha_ratio", c.min_alpha_ratio);
      c.max_digit_ratio = hr.get<double>("max_digit_ratio", c.max_digit_ratio);
      c.min_latvian_char_ratio = hr.get<double>("min_latvian_char_ratio", c.min_latvian_char_ratio);
      c.max_repeated_line_ratio = hr.get<double>("max_repeated_line_ratio", c.max_repeated_line_ratio);
      hr.finish();
    }
    for (auto& i : s.config.heuristics.violations(r.at("heuristics"))) issues.push_back(std::move(i));
    out = s;
  } else if (type == "dedup-exact") {
    ExactDedupStage s;
    s.config.match_text = r.get<bool>("match_text", true);
    s.config.metadata_fields = r.get<std::vector<std::string>>("metadata_fields", {"url"});
    out = s;
  } else if (type == "dedup-near") {
    NearDedupStage s;
    auto& c = s.config;
    c.ngram = r.get<std::size_t>("ngram", c.ngram);
    c.num_perm = r.get<std::size_t>("num_perm", c.num_perm);
    c.bands = r.get<std::size_t>("bands", c.bands);
    c.rows = r.get<std::size_t>("rows", c.rows);
    c.threshold = r.get<double>("threshold", c.threshold);
    c.perm_seed = r.get<std::uint64_t>("perm_seed", c.perm_seed);
    c.exact_verify = r.get<bool>("exact_verify", c.exact_verify);
    if (c.ngram < 1) r.issue("ngram", "must be >= 1");
    if (c.num_perm < 1) r.issue("num_perm", "must be >= 1");
    if (c.bands * c.rows != c.num_perm) {
      const std::string msg = "bands*rows = " + std::to_string(c.bands) + "*" + std::to_string(c.rows) +
                              " = " + std::to_string(c.bands * c.rows) +
                              " must equal num_perm = " + std::to_string(c.num_perm);
      r.issue("num_perm", msg);
      r.issue("bands", msg);
      r.issue("rows", msg);
    }
    if (!(c.threshold > 0.0 && c.threshold <= 1.0)) r.issue("threshold", "must lie in (0, 1]");
    out = s;
  } else if (type == "lm-score") {
    LmScoreStage s;
    s.model_path = resolve(base_dir, r.get<std::string>("model", ""));
    s.train_corpus = resolve(base_dir, r.get<std::string>("train_corpus", ""));
    s.train.order = r.get<std::size_t>("order", s.train.order);
    s.train.min_count = r.get<std::size_t>("min_count", s.train.min_count);
    s.train.fallback_discount = r.get<double>("fallback_discount", s.train.fallback_discount);
    if (s.model_path.empty() == s.train_corpus.empty()) {
      r.issue("model", "exactly one of model and train_corpus is required");
    } else if (!s.model_path.empty()) {
      require_file(r, "model", s.model_path, issues);
    } else {
      require_file(r, "train_corpus", s.train_corpus, issues);
    }
    if (s.train.order < 1 || s.train.order > kMaxNgramOrder) {
      r.issue("order", "must lie in [1, " + std::to_string(kMaxNgramOrder) + "]");
    }
    check_unit(r, "fallback_discount", s.train.fallback_discount, true, true);
    if (const json* p = r.raw("policy")) {
      FieldReader pr(*p, r.at("policy"), issues);
      const bool has_pct = pr.has("percentile");
      const bool has_abs = pr.has("threshold");
      if (has_pct == has_abs) {
        pr.issue("percentile", "exactly one of percentile and threshold is required");
      }
      if (has_pct) {
        s.policy = PerplexityPolicy::percentile(pr.get<double>("percentile", 90.0));
        if (!(s.policy.value >= 0.0 && s.policy.value <= 100.0)) pr.issue("percentile", "must lie in [0, 100]");
      } else {
        s.policy = PerplexityPolicy::absolute(pr.get<double>("threshold", 0.0));
        if (!(s.policy.value > 0.0)) pr.issue("threshold", "must be positive");
      }
      pr.finish();
    }
    out = s;
  } else if (type == "tokenize") {
    TokenizeStage s;
    s.vocab_path = resolve(base_dir, r.get<std::string>("vocab", ""));
    if (s.vocab_path.empty()) {
      r.issue("vocab", "is required");
    } else {
      require_file(r, "vocab", s.vocab_path, issues);
    }
    s.vocab = parse_vocab_options(r);
    out = s;
  } else if (type == "sample") {
    SampleStage s;
    if (const json* b = r.raw("buckets")) {
      if (!b->is_array()) {
        r.issue("buckets", "must be an array");
      } else {
        s.buckets.clear();
        for (std::size_t i = 0; i < b->size(); ++i) {
          FieldReader br((*b)[i], r.at("buckets") + "[" + std::to_string(i) + "]", issues);
          BucketQuota q;
          q.name = br.get<std::string>("name", "");
          q.min_tokens = br.get<std::size_t>("min_tokens", 0);
          if (const json* mx = br.raw("max_tokens"); mx && !mx->is_null()) {
            if (mx->is_number_unsigned()) {
              q.max_tokens = mx->get<std::size_t>();
            } else {
              br.issue("max_tokens", "must be a non-negative integer or null");
            }
          }
          q.target_tokens = br.get<std::size_t>("target_tokens", 0);
          br.finish();
          s.buckets.push_back(std::move(q));
        }
      }
      if (r.has("scale")) r.issue("scale", "scale and buckets are mutually exclusive");
    } else {
      const std::size_t scale = r.get<std::size_t>("scale", 1'000'000'000);
      if (scale < 2) r.issue("scale", "must be >= 2");
      s.buckets = default_quotas(scale);
    }
    for (auto& i : quota_violations(s.buckets, r.at("buckets"))) issues.push_back(std::move(i));
    const std::string mode = r.get<std::string>("mode", "quality");
    if (mode == "quality") {
      s.config.mode = SampleMode::quality;
    } else if (mode == "uniform") {
      s.config.mode = SampleMode::uniform;
    } else {
      r.issue("mode", "must be \"quality\" or \"uniform\"");
    }
    s.config.overshoot = r.get<double>("overshoot", s.config.overshoot);
    check_unit(r, "overshoot", s.config.overshoot, false, true);
    s.config.min_fill = r.get<double>("min_fill", s.config.min_fill);
    check_unit(r, "min_fill", s.config.min_fill, false, false);
    out = s;
  } else if (type == "pack") {
    PackStage s;
    s.vocab_path = resolve(base_dir, r.get<std::string>("vocab", ""));
    if (!s.vocab_path.empty()) require_file(r, "vocab", s.vocab_path, issues);
    s.vocab = parse_vocab_options(r);
    s.seq_len = r.get<std::size_t>("seq_len", s.seq_len);
    if (s.seq_len < 2) r.issue("seq_len", "must be >= 2");
    s.split_documents = r.get<bool>("split", s.split_documents);
    if (const json* m = r.raw("mask"); m && !m->is_null()) s.mask = parse_mask(*m, r.at("mask"), issues);
    out = s;
  } else if (type.empty()) {
    r.issue("type", "is required");
  } else {
    r.issue("type", "unknown stage type \"" + type + "\"");
  }
  r.finish();
  return out;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError(std::vector<Issue>{{assignment, "override must look like path=value"}});
  }
  std::string pointer;
  std::stringstream keys(assignment.substr(0, eq));
  std::string key;
  while (std::getline(keys, key, '.')) pointer += "/" + key;
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  try {
    doc[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw ValidationError(std::vector<Issue>{{assignment.substr(0, eq), e.what()}});
  }
}

PipelineConfig parse_config(const json& doc, const std::string& base_dir) {
  std::vector<Issue> issues;
  PipelineConfig cfg;
  cfg.raw = doc;
  FieldReader r(doc, "config", issues);
  cfg.input = resolve(base_dir, r.get<std::string>("input", ""));
  if (cfg.input.empty()) {
    r.issue("input", "is required");
  } else {
    require_file(r, "input", cfg.input, issues);
  }
  cfg.output_dir = resolve(base_dir, r.get<std::string>("output_dir", ""));
  if (cfg.output_dir.empty()) r.issue("output_dir", "is required");
  cfg.run_seed = r.get<std::uint64_t>("run_seed", 0);
  cfg.workers = r.get<unsigned>("workers", 1);
  if (cfg.workers < 1) r.issue("workers", "must be >= 1");
  cfg.canonical_order = r.get<bool>("canonical_order", true);

  bool tokenized = false;
  std::string last_vocab;
  if (const json* stages = r.raw("stages")) {
    if (!stages->is_array()) {
      r.issue("stages", "must be an array");
    } else {
      for (std::size_t i = 0; i < stages->size(); ++i) {
        const std::string path = "config.stages[" + std::to_string(i) + "]";
        StageConfig st = parse_stage((*stages)[i], path, base_dir, issues);
        if (auto* t = std::get_if<TokenizeStage>(&st)) {
          tokenized = true;
          last_vocab = t->vocab_path;
        } else if (std::holds_alternative<SampleStage>(st) && !tokenized) {
          issues.push_back({path, "sample requires a preceding tokenize stage"});
        } else if (auto* p = std::get_if<PackStage>(&st)) {
          if (p->vocab_path.empty()) {
            if (last_vocab.empty()) {
              issues.push_back({path + ".vocab", "required when no tokenize stage precedes pack"});
            }
            p->vocab_path = last_vocab;
          }
        }
        cfg.stages.push_back(std::move(st));
      }
    }
  }
  r.finish();
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return cfg;
}

PipelineConfig validate_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(std::vector<Issue>{{path, "cannot read config file"}});
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ValidationError(std::vector<Issue>{{path, "not valid JSON"}});
  for (const auto& o : overrides) apply_override(doc, o);
  const std::string base = fs::path(path).parent_path().string();
  return parse_config(doc, base.empty() ? "." : base);
}

// ---------------------------------------------------------------------------
// Running

std::string stage_output_name(std::size_t index, const std::string& type) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02zu-", index);
  return buf + type + ".jsonl";
}

StageResult ingest_documents(const std::string& path, const std::string& stage) {
  Stopwatch clock;
  JsonlReader reader(path);
  StageResult result;
  std::vector<Document> in;
  while (auto doc = reader.next()) {
    try {
      doc->text = normalize_text(doc->text);
      doc->refresh_word_count();
      in.push_back(*doc);
      result.kept.push_back(std::move(*doc));
    } catch (const InvalidUtf8&) {
      in.push_back(*doc);
      result.rejects.push_back(make_reject(*doc, stage, "invalid_utf8"));
    }
  }
  for (const auto& diag : reader.diagnostics()) {
    Document placeholder;
    placeholder.id = diag.id;
    in.push_back(placeholder);
    Reject r = make_reject(placeholder, stage, diag.reason);
    r.line = diag.line;
    result.rejects.push_back(std::move(r));
  }
  result.stats = tally_stage(stage, in, result.kept, result.rejects);
  result.stats.extras["lines"] = reader.lines_read();
  result.stats.extras["diagnostics"] = reader.diagnostics().size();
  result.stats.wall_time = clock.seconds();
  return result;
}

namespace {

std::string base_name(const std::string& name) {
  return name.substr(0, name.size() - std::string(".jsonl").size());
}

void write_text_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failure on " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

StageRun run_stage(const StageConfig& stage, std::vector<Document> docs, const StageContext& ctx) {
  const std::string type = stage_type(stage);
  const std::string& stem = ctx.artifact_stem;
  StageRun run;
  if (const auto* s = std::get_if<FilterStage>(&stage)) {
    run.result = filter_quality(std::move(docs), s->config);
  } else if (const auto* s = std::get_if<ExactDedupStage>(&stage)) {
    auto c = s->config;
    c.workers = ctx.workers;
    run.result = dedup_exact(std::move(docs), c);
  } else if (const auto* s = std::get_if<NearDedupStage>(&stage)) {
    auto c = s->config;
    c.workers = ctx.workers;
    NearDedupResult r = dedup_near(std::move(docs), c);
    const std::string clusters = stem + ".clusters.jsonl";
    JsonlWriter w(clusters);
    for (const auto& cl : r.clusters) w.write_line(cl.to_jsonl());
    w.close();
    run.artifacts.push_back(clusters);
    run.result = std::move(r);
  } else if (const auto* s = std::get_if<LmScoreStage>(&stage)) {
    std::optional<NgramModel> model;
    if (!s->model_path.empty()) {
      model.emplace(NgramModel::load(s->model_path));
    } else {
      auto opts = s->train;
      opts.workers = ctx.workers;
      model.emplace(NgramModel::train(ingest_documents(s->train_corpus, "lm-train").kept, opts));
      const std::string name = stem + ".model";
      model->save(name);
      run.artifacts.push_back(name);
    }
    run.result = filter_by_perplexity(std::move(docs), *model, s->policy, ctx.workers);
  } else if (const auto* s = std::get_if<TokenizeStage>(&stage)) {
    const SubwordVocab vocab = SubwordVocab::load(s->vocab_path, s->vocab);
    run.result = count_tokens(std::move(docs), vocab, ctx.workers);
  } else if (const auto* s = std::get_if<SampleStage>(&stage)) {
    auto c = s->config;
    c.seed = ctx.seed;
    run.result = sample_to_quota(std::move(docs), s->buckets, c);
  } else if (const auto* s = std::get_if<PackStage>(&stage)) {
    Stopwatch clock;
    const SubwordVocab vocab = SubwordVocab::load(s->vocab_path, s->vocab);
    PackConfig pc = PackConfig::for_vocab(vocab, s->seq_len);
    pc.split_documents = s->split_documents;
    std::vector<TokenizedDoc> tokenized(docs.size());
    parallel_for(docs.size(), ctx.workers, [&](std::size_t i) {
      tokenized[i] = {docs[i].id, tokenize(docs[i].text, vocab)};
    });
    const PackResult packed = pack_greedy(tokenized, pc);
    const std::string bin = stem + ".bin";
    const std::string side = stem + ".windows.jsonl";
    PackWriter writer(bin, side,
                      static_cast<std::uint32_t>(s->seq_len), static_cast<std::uint32_t>(vocab.size()));
    const std::uint64_t mask_seed = ctx.seed;
    std::size_t masked = 0, maskable = 0;
    for (std::size_t w = 0; w < packed.windows.size(); ++w) {
      if (s->mask) {
        Rng rng(window_seed(mask_seed, w));
        const MaskedSequence m = apply_masking(packed.windows[w], *s->mask, vocab, rng);
        masked += m.plan.positions.size();
        maskable += m.plan.maskable;
        writer.write(packed.windows[w], &m);
      } else {
        writer.write(packed.windows[w], nullptr);
      }
    }
    writer.close();
    run.artifacts.push_back(bin);
    run.artifacts.push_back(side);
    run.result.stats = tally_stage("pack", docs, docs, {});
    run.result.stats.extras["windows"] = packed.windows.size();
    run.result.stats.extras["seq_len"] = s->seq_len;
    run.result.stats.extras["efficiency"] = packed.efficiency;
    if (s->mask) {
      run.result.stats.extras["masked_positions"] = masked;
      run.result.stats.extras["maskable_positions"] = maskable;
    }
    run.result.kept = std::move(docs);
    run.result.stats.wall_time = clock.seconds();
  }
  run.result.stats.stage = type;
  for (auto& r : run.result.rejects) r.stage = type;
  return run;
}

namespace {

ordered_json manifest_entry(std::size_t index, const std::string& type, const fs::path& out_dir,
                            const std::vector<std::string>& files, const StageStats& stats) {
  ordered_json e;
  e["index"] = index;
  e["type"] = type;
  auto hashes = ordered_json::object();
  for (const auto& f : files) hashes[f] = hash_file((out_dir / f).string()).hex();
  e["files"] = std::move(hashes);
  e["stats"] = stats.to_json();
  return e;
}

bool entry_intact(const ordered_json& e, const fs::path& out_dir) {
  for (const auto& [name, hex] : e.at("files").items()) {
    const fs::path p = out_dir / name;
    if (!fs::is_regular_file(p) || hash_file(p.string()).hex() != hex.get<std::string>()) return false;
  }
  return true;
}

std::map<std::string, SourceTally> tallies(const std::vector<Document>& docs) {
  std::map<std::string, SourceTally> m;
  for (const auto& d : docs) {
    auto& t = m[d.source];
    ++t.docs;
    t.words += d.word_count;
  }
  return m;
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
  Stopwatch clock;
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);

  RunReport report;
  // Where results go does not change what is computed.
  nlohmann::json hashed = cfg.raw;
  hashed.erase("output_dir");
  report.config_hash = hash128(hashed.dump()).hex();
  report.input_hash = hash_file(cfg.input).hex();

  const fs::path manifest_path = out_dir / "manifest.json";
  std::vector<ordered_json> completed;
  if (opts.resume && fs::is_regular_file(manifest_path)) {
    std::ifstream in(manifest_path, std::ios::binary);
    const ordered_json old = ordered_json::parse(in, nullptr, false);
    if (!old.is_discarded() && old.value("config_hash", "") == report.config_hash &&
        old.value("input_hash", "") == report.input_hash) {
      for (const auto& e : old.at("stages")) {
        if (!entry_intact(e, out_dir)) break;
        completed.push_back(e);
      }
    }
  }
  if (completed.size() > cfg.stages.size() + 1) completed.resize(cfg.stages.size() + 1);

  auto write_manifest = [&] {
    ordered_json m;
    m["config_hash"] = report.config_hash;
    m["input_hash"] = report.input_hash;
    m["stages"] = completed;
    write_text_file(manifest_path, m.dump(2) + "\n");
  };

  std::vector<double> timings;
  std::vector<Document> docs;
  const std::size_t total = cfg.stages.size() + 1;
  for (std::size_t index = 0; index < total; ++index) {
    const std::string type = index == 0 ? "ingest" : stage_type(cfg.stages[index - 1]);
    const std::string name = stage_output_name(index, type);
    const fs::path output = out_dir / name;

    auto record = [&](StageStats st) {
      if (index == 0) {
        report.ingest = std::move(st);
      } else {
        report.stages.push_back(std::move(st));
      }
    };
    if (index < completed.size()) {
      record(StageStats::from_json(completed[index].at("stats")));
      timings.push_back(0.0);
      if (index + 1 == completed.size()) docs = read_jsonl(output.string()).docs;
      continue;
    }
    if (opts.fail_before_stage && *opts.fail_before_stage == index) {
      throw StageFailure(index, type, "simulated failure");
    }

    StageRun run;
    try {
      if (index == 0) {
        run.result = ingest_documents(cfg.input);
        if (cfg.canonical_order) {
          std::stable_sort(run.result.kept.begin(), run.result.kept.end(),
                           [](const Document& a, const Document& b) {
                             return std::tie(a.source, a.id) < std::tie(b.source, b.id);
                           });
        }
      } else {
        const StageContext ctx{(out_dir / base_name(name)).string(), derive_seed(cfg.run_seed, index),
                               cfg.workers};
        run = run_stage(cfg.stages[index - 1], std::move(docs), ctx);
        for (auto& a : run.artifacts) a = fs::path(a).filename().string();
      }
      write_jsonl(run.result.kept, output.string());
      write_rejects(run.result.rejects, rejects_path(output.string()));
    } catch (const StageFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw StageFailure(index, type, e.what());
    }
    std::vector<std::string> files{name, name + ".rejects"};
    files.insert(files.end(), run.artifacts.begin(), run.artifacts.end());
    completed.push_back(manifest_entry(index, type, out_dir, files, run.result.stats));
    write_manifest();
    timings.push_back(run.result.stats.wall_time);
    record(run.result.stats);
    docs = std::move(run.result.kept);
  }
  write_manifest();

  const auto& first = report.ingest.per_source_out;
  const auto final_tallies = tallies(docs);
  for (const auto& [source, t] : first) {
    report.sources[source].docs_before = t.docs;
    report.sources[source].words_before = t.words;
  }
  for (const auto& [source, t] : final_tallies) {
    report.sources[source].docs_after = t.docs;
    report.sources[source].words_after = t.words;
  }
  write_jsonl(docs, (out_dir / "output.jsonl").string());
  write_text_file(out_dir / "report.json", report.to_json().dump(2) + "\n");
  write_text_file(out_dir / "report.txt", report_table(report));

  report.wall_time = clock.seconds();
  report.ingest.wall_time = timings[0];
  for (std::size_t i = 0; i < report.stages.size(); ++i) report.stages[i].wall_time = timings[i + 1];
  ordered_json t;
  t["total_seconds"] = report.wall_time;
  auto per = ordered_json::array();
  per.push_back({{"stage", report.ingest.stage}, {"seconds", report.ingest.wall_time}});
  for (const auto& s : report.stages) per.push_back({{"stage", s.stage}, {"seconds", s.wall_time}});
  t["stages"] = std::move(per);
  write_text_file(out_dir / "timings.json", t.dump(2) + "\n");
  return report;
}

}  // namespace lvcorpus
