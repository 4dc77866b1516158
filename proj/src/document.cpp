#include "lvcorpus/document.hpp"

#include "lvcorpus/text.hpp"

namespace lvcorpus {

void Document::refresh_word_count() { word_count = lvcorpus::word_count(text); }

Reject make_reject(const Document& doc, std::string stage, std::string reason) {
  Reject r;
  r.id = doc.id;
  r.stage = std::move(stage);
  r.reason = std::move(reason);
  r.source = doc.source;
  r.words = doc.word_count;
  return r;
}

namespace {

nlohmann::ordered_json tallies_to_json(const std::map<std::string, SourceTally>& m) {
  auto j = nlohmann::ordered_json::object();
  for (const auto& [source, t] : m) {
    j[source] = {{"docs", t.docs}, {"words", t.words}};
  }
  return j;
}

std::map<std::string, SourceTally> tallies_from_json(const nlohmann::ordered_json& j) {
  std::map<std::string, SourceTally> m;
  for (const auto& [source, t] : j.items()) {
    m[source] = SourceTally{t.at("docs").get<std::size_t>(), t.at("words").get<std::size_t>()};
  }
  return m;
}

void add(std::map<std::string, SourceTally>& m, const Document& d) {
  auto& t = m[d.source];
  ++t.docs;
  t.words += d.word_count;
}

}  // namespace

nlohmann::ordered_json StageStats::to_json() const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["docs_in"] = docs_in;
  j["docs_out"] = docs_out;
  j["words_in"] = words_in;
  j["words_out"] = words_out;
  j["per_source_in"] = tallies_to_json(per_source_in);
  j["per_source_out"] = tallies_to_json(per_source_out);
  j["per_source_rejected"] = tallies_to_json(per_source_rejected);
  j["words_trimmed"] = words_trimmed;
  j["extras"] = extras;
  return j;
}

StageStats StageStats::from_json(const nlohmann::ordered_json& j) {
  StageStats s;
  s.stage = j.at("stage").get<std::string>();
  s.docs_in = j.at("docs_in").get<std::size_t>();
  s.docs_out = j.at("docs_out").get<std::size_t>();
  s.words_in = j.at("words_in").get<std::size_t>();
  s.words_out = j.at("words_out").get<std::size_t>();
  s.per_source_in = tallies_from_json(j.at("per_source_in"));
  s.per_source_out = tallies_from_json(j.at("per_source_out"));
  s.per_source_rejected = tallies_from_json(j.at("per_source_rejected"));
  s.words_trimmed = j.at("words_trimmed").get<std::map<std::string, std::size_t>>();
  s.extras = j.value("extras", nlohmann::ordered_json::object());
  return s;
}

StageStats tally_stage(std::string stage, const std::vector<Document>& in,
                       const std::vector<Document>& out, const std::vector<Reject>& rejects) {
  StageStats s;
  s.stage = std::move(stage);
  s.docs_in = in.size();
  s.docs_out = out.size();
  for (const auto& d : in) {
    s.words_in += d.word_count;
    add(s.per_source_in, d);
  }
  for (const auto& d : out) {
    s.words_out += d.word_count;
    add(s.per_source_out, d);
  }
  for (const auto& r : rejects) {
    auto& t = s.per_source_rejected[r.source];
    ++t.docs;
    t.words += r.words;
  }
  return s;
}

}  // namespace lvcorpus
