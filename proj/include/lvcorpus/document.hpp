#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace lvcorpus {

/// One corpus record.
struct Document {
  std::string id;
  std::string source;
  std::optional<std::string> url;
  std::string text;
  std::map<std::string, std::string> meta;

  std::size_t word_count = 0;
  std::optional<std::size_t> token_count;
  std::optional<double> perplexity;

  /// Recomputes word_count from text.
  void refresh_word_count();

  bool operator==(const Document&) const = default;
};

/// One entry of a `<output>.rejects` sidecar.
struct Reject {
  std::string id;
  std::string stage;
  std::string reason;
  std::string source;
  std::size_t words = 0;            // word_count of the document as it entered the stage
  std::optional<std::string> kept;  // dedup stages: the surviving document
  std::optional<std::size_t> line;  // ingest: offending input line

  bool operator==(const Reject&) const = default;
};

struct SourceTally {
  std::size_t docs = 0;
  std::size_t words = 0;

  bool operator==(const SourceTally&) const = default;
};

Reject make_reject(const Document& doc, std::string stage, std::string reason);

struct StageStats {
  std::string stage;
  std::size_t docs_in = 0;
  std::size_t docs_out = 0;
  std::size_t words_in = 0;
  std::size_t words_out = 0;
  std::map<std::string, SourceTally> per_source_in;
  std::map<std::string, SourceTally> per_source_out;
  std::map<std::string, SourceTally> per_source_rejected;
  /// Words removed from surviving documents by in-place edits (boilerplate).
  std::map<std::string, std::size_t> words_trimmed;
  /// Stage-specific figures (cutoffs, bucket sums, efficiency, warnings).
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();
  double wall_time = 0.0;

  std::size_t docs_rejected() const { return docs_in - docs_out; }

  /// Serialized form excludes wall_time so reports stay reproducible.
  nlohmann::ordered_json to_json() const;
  static StageStats from_json(const nlohmann::ordered_json& j);
};

/// Stats from a stage's input, surviving documents and rejects.
StageStats tally_stage(std::string stage, const std::vector<Document>& in,
                       const std::vector<Document>& out, const std::vector<Reject>& rejects);

struct StageResult {
  std::vector<Document> kept;
  std::vector<Reject> rejects;
  StageStats stats;
};

/// Wall-clock stopwatch for StageStats::wall_time.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace lvcorpus
