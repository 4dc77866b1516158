#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lvcorpus/document.hpp"
#include "lvcorpus/hashing.hpp"

namespace lvcorpus {

/// Host and path, lowercased; scheme, query, fragment and trailing slashes
/// dropped. nullopt for an empty URL.
std::optional<std::string> canonical_url(std::string_view url);

struct ExactKey {
  Hash128 text_hash;
  std::optional<std::string> url_key;
  /// Values of additional metadata fields, in configured order.
  std::vector<std::optional<std::string>> meta_keys;
};

struct ExactDedupConfig {
  bool match_text = true;
  /// Metadata fields matched exactly. "url" means Document::url (canonicalized);
  /// any other name is looked up in Document::meta.
  std::vector<std::string> metadata_fields{"url"};
  unsigned workers = 1;
};

ExactKey exact_key(const Document& doc, const ExactDedupConfig& cfg = {});

/// Keep-first over text hash, then keep-first per metadata key among the
/// survivors. Output order is input order. Reasons: exact_text, exact_url,
/// exact_meta:<field>.
StageResult dedup_exact(std::vector<Document> docs, const ExactDedupConfig& cfg = {});

}  // namespace lvcorpus
