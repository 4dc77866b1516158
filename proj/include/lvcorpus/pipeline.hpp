#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lvcorpus/document.hpp"
#include "lvcorpus/error.hpp"
#include "lvcorpus/exact_dedup.hpp"
#include "lvcorpus/masking.hpp"
#include "lvcorpus/near_dedup.hpp"
#include "lvcorpus/ngram_lm.hpp"
#include "lvcorpus/packing.hpp"
#include "lvcorpus/quality.hpp"
#include "lvcorpus/sampler.hpp"
#include "lvcorpus/vocab.hpp"

namespace lvcorpus {

struct FilterStage {
  QualityFilterConfig config;
};

struct ExactDedupStage {
  ExactDedupConfig config;
};

struct NearDedupStage {
  NearDedupConfig config;
};

struct LmScoreStage {
  std::string model_path;    // load this model, or
  std::string train_corpus;  // train on this JSONL corpus
  NgramModel::TrainOptions train;
  PerplexityPolicy policy = PerplexityPolicy::percentile(90.0);
};

struct TokenizeStage {
  std::string vocab_path;
  VocabOptions vocab;
};

struct SampleStage {
  std::vector<BucketQuota> buckets = default_quotas();
  SampleConfig config;
};

struct PackStage {
  std::string vocab_path;  // empty: inherit from the closest preceding tokenize stage
  VocabOptions vocab;
  std::size_t seq_len = 512;
  bool split_documents = true;
  std::optional<MaskConfig> mask;
};

using StageConfig = std::variant<FilterStage, ExactDedupStage, NearDedupStage, LmScoreStage,
                                 TokenizeStage, SampleStage, PackStage>;

/// Stage type names as used in config files and as CLI subcommands.
std::string stage_type(const StageConfig& stage);

struct PipelineConfig {
  std::string input;
  std::string output_dir;
  std::uint64_t run_seed = 0;
  unsigned workers = 1;
  bool canonical_order = true;  // stable sort by (source, id) after ingest
  std::vector<StageConfig> stages;
  /// Canonical JSON the config was parsed from (after overrides).
  nlohmann::json raw;
};

/// Applies "a.b.2.c=value" style overrides to a JSON document; the value is
/// parsed as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Every violation is collected before throwing ValidationError. Relative
/// paths resolve against base_dir.
PipelineConfig parse_config(const nlohmann::json& doc, const std::string& base_dir);

/// Reads, overrides and validates a config file. Throws ValidationError.
PipelineConfig validate_config(const std::string& path,
                               const std::vector<std::string>& overrides = {});

/// Stage-level parsers shared with the per-stage CLI entry points.
StageConfig parse_stage(const nlohmann::json& obj, const std::string& path,
                        const std::string& base_dir, std::vector<Issue>& issues);

struct SourceTotals {
  std::size_t docs_before = 0;
  std::size_t words_before = 0;
  std::size_t docs_after = 0;
  std::size_t words_after = 0;
};

struct RunReport {
  std::string config_hash;
  std::string input_hash;
  StageStats ingest;               // reading and normalizing the input
  std::vector<StageStats> stages;  // configured stages, in order
  std::map<std::string, SourceTotals> sources;
  double wall_time = 0.0;

  /// Reproducible form: no timings.
  nlohmann::ordered_json to_json() const;
  static RunReport from_json(const nlohmann::ordered_json& j);
};

class StageFailure : public Error {
 public:
  StageFailure(std::size_t index, std::string stage, const std::string& what)
      : Error("stage " + std::to_string(index) + " (" + stage + ") failed: " + what),
        index_(index), stage_(std::move(stage)) {}

  std::size_t index() const noexcept { return index_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::size_t index_;
  std::string stage_;
};

struct RunOptions {
  bool resume = true;
  /// Test hook: throw StageFailure instead of running this 1-based stage.
  std::optional<std::size_t> fail_before_stage;
};

/// Normalizes text and computes word counts; invalid records become rejects.
StageResult ingest_documents(const std::string& path, const std::string& stage = "ingest");

struct StageContext {
  std::string artifact_stem;  // side files are written as <stem>.<suffix>
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct StageRun {
  StageResult result;
  std::vector<std::string> artifacts;  // side files written, full paths
};

/// Runs one configured stage on documents already in memory.
StageRun run_stage(const StageConfig& stage, std::vector<Document> docs, const StageContext& ctx);

/// Runs ingest plus the configured stages, writing per-stage outputs, rejects,
/// a manifest for resume, report.json/report.txt and timings.json.
RunReport run_pipeline(const PipelineConfig& cfg, const RunOptions& opts = {});

/// Per-source word table with a "Total after filtering and deduplication" row,
/// followed by a per-stage summary.
std::string report_table(const RunReport& report);

/// Zero-tolerance accounting: every stage's input equals its output plus
/// rejections plus trimmed words, stages chain, and final totals equal initial
/// totals minus everything removed. When rejects_dir is given the rejects
/// files are re-read and must match the recorded counts.
std::vector<Issue> check_conservation(const RunReport& report,
                                      const std::optional<std::string>& rejects_dir = {});

/// Per-source documents and words of a JSONL file, as a small table.
std::string corpus_stats_table(const std::vector<Document>& docs);

/// File names used inside the output directory.
std::string stage_output_name(std::size_t index, const std::string& type);

}  // namespace lvcorpus
