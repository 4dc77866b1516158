// lvcorpus: Latvian pretraining corpus pipeline driver.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "lvcorpus/jsonl.hpp"
#include "lvcorpus/pipeline.hpp"

namespace fs = std::filesystem;
using namespace lvcorpus;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitStageFailure = 2;

struct StageArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string model;  // lm-score
  std::string vocab;  // tokenize, pack
  bool dump = false;  // tokenize
};

void print_issues(const ValidationError& e) {
  std::cerr << "invalid configuration:\n";
  for (const auto& i : e.issues()) std::cerr << "  " << i.path << ": " << i.message << "\n";
}

// Stage object for a per-stage command: the first stage of this type in the
// config file (if any), then scalar overrides.
json stage_object(const std::string& type, const StageArgs& a, std::string& base_dir) {
  json obj = {{"type", type}};
  base_dir = ".";
  if (!a.config.empty()) {
    std::ifstream in(a.config, std::ios::binary);
    if (!in) throw ValidationError(std::vector<Issue>{{a.config, "cannot read config file"}});
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ValidationError(std::vector<Issue>{{a.config, "not valid JSON"}});
    if (doc.contains("stages") && doc["stages"].is_array()) {
      for (const auto& s : doc["stages"]) {
        if (s.is_object() && s.value("type", "") == type) {
          obj = s;
          break;
        }
      }
    }
    const std::string parent = fs::path(a.config).parent_path().string();
    if (!parent.empty()) base_dir = parent;
  }
  for (const auto& o : a.overrides) apply_override(obj, o);
  if (!a.model.empty()) obj["model"] = fs::absolute(a.model).string();
  if (!a.vocab.empty()) obj["vocab"] = fs::absolute(a.vocab).string();
  return obj;
}

int run_stage_command(const std::string& type, const StageArgs& a) {
  std::string base_dir;
  json obj = stage_object(type, a, base_dir);
  if (type == "lm-score" && !obj.contains("model") && !obj.contains("train_corpus")) {
    throw ValidationError(std::vector<Issue>{{"model", "lm-score needs --model or a train_corpus setting"}});
  }
  std::vector<Issue> issues;
  const StageConfig stage = parse_stage(obj, "stage", base_dir, issues);
  if (const auto* p = std::get_if<PackStage>(&stage); p && p->vocab_path.empty()) {
    issues.push_back({"stage.vocab", "pack needs --vocab"});
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  StageResult ingest = ingest_documents(a.input, type);
  std::vector<Reject> rejects = std::move(ingest.rejects);
  const fs::path out(a.output);
  std::string stem = out.string();
  if (out.extension() == ".jsonl") stem = (out.parent_path() / out.stem()).string();
  StageRun run;
  try {
    run = run_stage(stage, std::move(ingest.kept), StageContext{stem, a.seed, a.workers});
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(1, type, e.what());
  }
  rejects.insert(rejects.end(), run.result.rejects.begin(), run.result.rejects.end());
  write_jsonl(run.result.kept, a.output);
  write_rejects(rejects, rejects_path(a.output));
  std::cout << run.result.stats.to_json().dump(2) << "\n";
  for (const auto& f : run.artifacts) std::cerr << "wrote " << f << "\n";
  return kExitOk;
}

int lm_train_command(const StageArgs& a) {
  json obj = {{"order", 5}, {"min_count", 2}, {"fallback_discount", 0.5}};
  for (const auto& o : a.overrides) apply_override(obj, o);
  std::vector<Issue> issues;
  obj["type"] = "lm-score";
  obj["train_corpus"] = a.input;
  const StageConfig stage = parse_stage(obj, "lm-train", ".", issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  auto opts = std::get<LmScoreStage>(stage).train;
  opts.workers = a.workers;
  const NgramModel model = NgramModel::train(ingest_documents(a.input, "lm-train").kept, opts);
  model.save(a.output);
  std::cout << "order " << model.order() << ", vocabulary " << model.vocab_size() << ", tokens "
            << model.total_tokens() << "\n";
  for (std::size_t o = 1; o <= model.order(); ++o) std::cout << "D" << o << " = " << model.discount(o) << "\n";
  return kExitOk;
}

int tokenize_dump(const StageArgs& a) {
  std::string base_dir;
  std::vector<Issue> issues;
  const StageConfig stage = parse_stage(stage_object("tokenize", a, base_dir), "stage", base_dir, issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  const auto& t = std::get<TokenizeStage>(stage);
  const SubwordVocab vocab = SubwordVocab::load(t.vocab_path, t.vocab);
  for (const auto& doc : ingest_documents(a.input, "tokenize").kept) {
    std::cout << "# " << doc.id << "\n";
    for (TokenId id : tokenize(doc.text, vocab)) std::cout << id << ":" << escape_piece(vocab.piece(id)) << "\n";
  }
  return kExitOk;
}

void add_stage_options(CLI::App* cmd, StageArgs& a, bool needs_output = true) {
  cmd->add_option("-i,--input", a.input, "Input JSONL")->required()->check(CLI::ExistingFile);
  auto* out = cmd->add_option("-o,--output", a.output, "Output path");
  if (needs_output) out->required();
  cmd->add_option("-c,--config", a.config, "Pipeline config to take stage settings from")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", a.overrides, "Override a stage field, key=value");
  cmd->add_option("--seed", a.seed, "Stage seed");
  cmd->add_option("-j,--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latvian pretraining corpus pipeline"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  bool no_resume = false;
  std::optional<std::size_t> simulate_failure;

  auto* validate = app.add_subcommand("validate", "Validate a pipeline config");
  validate->add_option("config", config, "Config file")->required();
  validate->add_option("--set", overrides, "Override a field, dotted.path=value");

  auto* run = app.add_subcommand("run", "Run the configured pipeline");
  run->add_option("config", config, "Config file")->required();
  run->add_option("--set", overrides, "Override a field, dotted.path=value");
  run->add_flag("--no-resume", no_resume, "Ignore an existing manifest");
  run->add_option("--simulate-failure", simulate_failure, "Fail before this stage index (testing)");

  std::string stats_input;
  auto* stats = app.add_subcommand("stats", "Per-source document and word counts of a JSONL file");
  stats->add_option("input", stats_input, "JSONL file")->required()->check(CLI::ExistingFile);

  StageArgs stage_args;
  std::vector<std::pair<std::string, CLI::App*>> stage_cmds;
  for (const char* type : {"filter", "dedup-exact", "dedup-near", "lm-score", "tokenize", "sample", "pack"}) {
    auto* cmd = app.add_subcommand(type, std::string("Run the ") + type + " stage on one file");
    add_stage_options(cmd, stage_args, std::string(type) != "tokenize");
    stage_cmds.emplace_back(type, cmd);
  }
  app.get_subcommand("lm-score")->add_option("--model", stage_args.model, "Model file")->check(CLI::ExistingFile);
  app.get_subcommand("tokenize")->add_option("--vocab", stage_args.vocab, "Vocab file")->check(CLI::ExistingFile);
  app.get_subcommand("tokenize")->add_flag("--dump", stage_args.dump, "Print id:piece for every token");
  app.get_subcommand("pack")->add_option("--vocab", stage_args.vocab, "Vocab file")->check(CLI::ExistingFile);

  auto* lm_train = app.add_subcommand("lm-train", "Train a Kneser-Ney model");
  add_stage_options(lm_train, stage_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const PipelineConfig cfg = validate_config(config, overrides);
      std::cout << "valid: " << cfg.stages.size() << " stage(s)\n";
      return kExitOk;
    }
    if (*run) {
      const PipelineConfig cfg = validate_config(config, overrides);
      RunOptions opts;
      opts.resume = !no_resume;
      opts.fail_before_stage = simulate_failure;
      const RunReport report = run_pipeline(cfg, opts);
      std::cout << report_table(report);
      return kExitOk;
    }
    if (*stats) {
      std::cout << corpus_stats_table(ingest_documents(stats_input).kept);
      return kExitOk;
    }
    if (*lm_train) return lm_train_command(stage_args);
    for (const auto& [type, cmd] : stage_cmds) {
      if (!*cmd) continue;
      if (type == "tokenize" && stage_args.dump) return tokenize_dump(stage_args);
      if (stage_args.output.empty()) {
        std::cerr << "--output is required\n";
        return kExitInvalid;
      }
      return run_stage_command(type, stage_args);
    }
  } catch (const ValidationError& e) {
    print_issues(e);
    return kExitInvalid;
  } catch (const StageFailure& e) {
    std::cerr << e.what() << "\n";
    return kExitStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStageFailure;
  }
  return kExitOk;
}
