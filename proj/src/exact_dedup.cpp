#include "lvcorpus/exact_dedup.hpp"

#include <unordered_map>

#include "lvcorpus/parallel.hpp"
#include "lvcorpus/text.hpp"

namespace lvcorpus {

std::optional<std::string> canonical_url(std::string_view url) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  url = trim(url);
  if (const auto cut = url.find_first_of("?#"); cut != std::string_view::npos) {
    url = url.substr(0, cut);
  }
  if (const auto scheme = url.find("://"); scheme != std::string_view::npos) {
    url = url.substr(scheme + 3);
  } else if (url.starts_with("//")) {
    url.remove_prefix(2);
  }
  while (!url.empty() && url.back() == '/') url.remove_suffix(1);
  if (url.empty()) return std::nullopt;
  std::string key(url);
  for (char& c : key) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return key;
}

ExactKey exact_key(const Document& doc, const ExactDedupConfig& cfg) {
  ExactKey key;
  // Stage inputs are already normalized; normalizing again is idempotent
  // and keeps the key well defined for raw callers.
  key.text_hash = hash128(normalize_text(doc.text));
  for (const auto& field : cfg.metadata_fields) {
    std::optional<std::string> value;
    if (field == "url") {
      if (doc.url) value = canonical_url(*doc.url);
    } else if (const auto it = doc.meta.find(field); it != doc.meta.end() && !it->second.empty()) {
      value = it->second;
    }
    if (field == "url") key.url_key = value;
    key.meta_keys.push_back(std::move(value));
  }
  return key;
}

StageResult dedup_exact(std::vector<Document> docs, const ExactDedupConfig& cfg) {
  Stopwatch clock;
  std::vector<ExactKey> keys(docs.size());
  parallel_for(docs.size(), cfg.workers, [&](std::size_t i) { keys[i] = exact_key(docs[i], cfg); });

  StageResult result;
  std::vector<bool> alive(docs.size(), true);
  std::vector<std::size_t> first(docs.size());
  if (cfg.match_text) {
    std::unordered_map<Hash128, std::size_t, Hash128Hasher> seen;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto [it, fresh] = seen.emplace(keys[i].text_hash, i);
      if (!fresh) {
        alive[i] = false;
        first[i] = it->second;
      }
    }
  }
  std::vector<std::string> reason(docs.size(), "exact_text");
  for (std::size_t f = 0; f < cfg.metadata_fields.size(); ++f) {
    const std::string& field = cfg.metadata_fields[f];
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (!alive[i]) continue;
      const auto& value = keys[i].meta_keys[f];
      if (!value) continue;
      const auto [it, fresh] = seen.emplace(*value, i);
      if (!fresh) {
        alive[i] = false;
        first[i] = it->second;
        reason[i] = field == "url" ? "exact_url" : "exact_meta:" + field;
      }
    }
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (alive[i]) continue;
    Reject r = make_reject(docs[i], "dedup-exact", reason[i]);
    r.kept = docs[first[i]].id;
    result.rejects.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (alive[i]) result.kept.push_back(docs[i]);
  }
  result.stats = tally_stage("dedup-exact", docs, result.kept, result.rejects);
  result.stats.wall_time = clock.seconds();
  return result;
}

}  // namespace lvcorpus
