#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "lvcorpus/document.hpp"

namespace lvcorpus {

/// Meta keys that carry derived statistics through JSONL files.
inline constexpr const char* kTokenCountKey = "token_count";
inline constexpr const char* kPerplexityKey = "perplexity";

/// A skipped input line.
struct ReadDiagnostic {
  std::size_t line = 0;
  std::string reason;  // invalid_utf8 | malformed_json | missing_id | missing_text | bad_field | duplicate_id
  std::string id;      // empty when unknown
};

/// Canonical single-line serialization: keys id, source, url, text, meta;
/// meta keys sorted; non-ASCII emitted raw.
std::string serialize_document(const Document& doc);

/// Parses one line; nullopt plus a reason on schema violation.
std::optional<Document> parse_document(const std::string& line, std::string& reason);

/// Streaming reader. Malformed lines never abort the stream; each one adds
/// a diagnostic. I/O failures throw IoError naming path and line.
class JsonlReader {
 public:
  explicit JsonlReader(std::string path);

  std::optional<Document> next();

  const std::vector<ReadDiagnostic>& diagnostics() const noexcept { return diagnostics_; }
  std::size_t lines_read() const noexcept { return line_no_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::vector<ReadDiagnostic> diagnostics_;
  std::unordered_set<std::string> seen_ids_;
};

class JsonlWriter {
 public:
  explicit JsonlWriter(std::string path);
  ~JsonlWriter();

  JsonlWriter(const JsonlWriter&) = delete;
  JsonlWriter& operator=(const JsonlWriter&) = delete;

  void write(const Document& doc);
  void write_line(const std::string& line);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t line_no_ = 0;
};

struct ReadResult {
  std::vector<Document> docs;
  std::vector<ReadDiagnostic> diagnostics;
};

ReadResult read_jsonl(const std::string& path);
void write_jsonl(const std::vector<Document>& docs, const std::string& path);

std::string serialize_reject(const Reject& r);
Reject parse_reject(const std::string& line);
void write_rejects(const std::vector<Reject>& rejects, const std::string& path);
std::vector<Reject> read_rejects(const std::string& path);

/// Sidecar path convention: "<output>.rejects".
inline std::string rejects_path(const std::string& output) { return output + ".rejects"; }

}  // namespace lvcorpus
