#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "lvcorpus/jsonl.hpp"
#include "lvcorpus/pipeline.hpp"

namespace lvcorpus {

using nlohmann::ordered_json;

ordered_json RunReport::to_json() const {
  ordered_json j;
  j["config_hash"] = config_hash;
  j["input_hash"] = input_hash;
  j["ingest"] = ingest.to_json();
  auto st = ordered_json::array();
  for (const auto& s : stages) st.push_back(s.to_json());
  j["stages"] = std::move(st);
  auto src = ordered_json::object();
  for (const auto& [name, t] : sources) {
    src[name] = {{"docs_before", t.docs_before},
                 {"words_before", t.words_before},
                 {"docs_after", t.docs_after},
                 {"words_after", t.words_after}};
  }
  j["sources"] = std::move(src);
  return j;
}

RunReport RunReport::from_json(const ordered_json& j) {
  RunReport r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.input_hash = j.at("input_hash").get<std::string>();
  r.ingest = StageStats::from_json(j.at("ingest"));
  for (const auto& s : j.at("stages")) r.stages.push_back(StageStats::from_json(s));
  for (const auto& [name, t] : j.at("sources").items()) {
    r.sources[name] = SourceTotals{t.at("docs_before").get<std::size_t>(), t.at("words_before").get<std::size_t>(),
                                   t.at("docs_after").get<std::size_t>(), t.at("words_after").get<std::size_t>()};
  }
  return r;
}

namespace {

std::string percent(std::size_t part, std::size_t whole) {
  if (whole == 0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * static_cast<double>(part) / static_cast<double>(whole));
  return buf;
}

std::string row(const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::size_t pad = widths[i] > cells[i].size() ? widths[i] - cells[i].size() : 0;
    if (i == 0) {
      out += cells[i] + std::string(pad, ' ');
    } else {
      out += "  " + std::string(pad, ' ') + cells[i];
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out + "\n";
}

std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], r[i].size());
  }
  std::string out = row(rows.front(), widths);
  std::size_t total = 0;
  for (auto w : widths) total += w;
  out += std::string(total + 2 * (widths.size() - 1), '-') + "\n";
  for (std::size_t i = 1; i < rows.size(); ++i) out += row(rows[i], widths);
  return out;
}

std::string display_source(const std::string& s) { return s.empty() ? "(unknown)" : s; }

}  // namespace

static std::string millions(std::size_t words) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", static_cast<double>(words) / 1e6);
  return buf;
}

std::string report_table(const RunReport& report) {
  std::vector<std::vector<std::string>> rows{
      {"Source", "Docs before", "Docs after", "Words before (M)", "Words after (M)", "Words kept"}};
  SourceTotals total;
  for (const auto& [name, t] : report.sources) {
    rows.push_back({display_source(name), std::to_string(t.docs_before), std::to_string(t.docs_after),
                    millions(t.words_before), millions(t.words_after), percent(t.words_after, t.words_before)});
    total.docs_before += t.docs_before;
    total.words_before += t.words_before;
    total.docs_after += t.docs_after;
    total.words_after += t.words_after;
  }
  rows.push_back({"Total after filtering and deduplication", std::to_string(total.docs_before),
                  std::to_string(total.docs_after), millions(total.words_before), millions(total.words_after),
                  percent(total.words_after, total.words_before)});

  std::vector<std::vector<std::string>> stages{{"Stage", "Docs in", "Docs out", "Words in", "Words out", "Words removed"}};
  std::vector<const StageStats*> chain{&report.ingest};
  for (const auto& s : report.stages) chain.push_back(&s);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& s = *chain[i];
    char label[64];
    std::snprintf(label, sizeof(label), "%02zu %s", i, s.stage.c_str());
    stages.push_back({label, std::to_string(s.docs_in), std::to_string(s.docs_out), std::to_string(s.words_in),
                      std::to_string(s.words_out), std::to_string(s.words_in - s.words_out)});
  }
  return table(rows) + "\n" + table(stages);
}

std::vector<Issue> check_conservation(const RunReport& report, const std::optional<std::string>& rejects_dir) {
  std::vector<Issue> issues;
  auto fail = [&](const std::string& where, const std::string& what) { issues.push_back({where, what}); };

  std::vector<const StageStats*> chain{&report.ingest};
  for (const auto& s : report.stages) chain.push_back(&s);

  std::size_t removed_words = 0;
  std::map<std::string, SourceTally> removed_by_source;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const StageStats& s = *chain[i];
    const std::string where = "stage " + std::to_string(i) + " (" + s.stage + ")";

    std::size_t rej_docs = 0, rej_words = 0, trimmed = 0;
    for (const auto& [src, t] : s.per_source_rejected) {
      rej_docs += t.docs;
      rej_words += t.words;
    }
    for (const auto& [src, w] : s.words_trimmed) trimmed += w;
    if (s.docs_in != s.docs_out + rej_docs) {
      fail(where, "docs_in " + std::to_string(s.docs_in) + " != docs_out " + std::to_string(s.docs_out) +
                      " + rejected " + std::to_string(rej_docs));
    }
    if (s.words_in != s.words_out + rej_words + trimmed) {
      fail(where, "words_in " + std::to_string(s.words_in) + " != words_out " + std::to_string(s.words_out) +
                      " + rejected " + std::to_string(rej_words) + " + trimmed " + std::to_string(trimmed));
    }

    std::set<std::string> names;
    for (const auto& m : {s.per_source_in, s.per_source_out, s.per_source_rejected}) {
      for (const auto& [src, t] : m) names.insert(src);
    }
    for (const auto& [src, w] : s.words_trimmed) names.insert(src);
    for (const auto& src : names) {
      auto get = [&](const std::map<std::string, SourceTally>& m) {
        const auto it = m.find(src);
        return it == m.end() ? SourceTally{} : it->second;
      };
      const SourceTally in = get(s.per_source_in), out = get(s.per_source_out), rej = get(s.per_source_rejected);
      const auto tit = s.words_trimmed.find(src);
      const std::size_t trim = tit == s.words_trimmed.end() ? 0 : tit->second;
      if (in.docs != out.docs + rej.docs || in.words != out.words + rej.words + trim) {
        fail(where + " source " + display_source(src), "per-source totals do not balance");
      }
      if (i > 0) {
        removed_by_source[src].docs += rej.docs;
        removed_by_source[src].words += rej.words + trim;
      }
    }

    if (i > 0) {
      const StageStats& prev = *chain[i - 1];
      if (s.docs_in != prev.docs_out || s.words_in != prev.words_out) {
        fail(where, "input does not match the previous stage's output");
      }
      if (s.per_source_in.size() != prev.per_source_out.size() ||
          !std::equal(s.per_source_in.begin(), s.per_source_in.end(), prev.per_source_out.begin(),
                      [](const auto& a, const auto& b) {
                        return a.first == b.first && a.second.docs == b.second.docs && a.second.words == b.second.words;
                      })) {
        fail(where, "per-source input does not match the previous stage's output");
      }
      removed_words += rej_words + trimmed;
    }

    if (rejects_dir) {
      const auto path = std::filesystem::path(*rejects_dir) / rejects_path(stage_output_name(i, s.stage));
      if (!std::filesystem::is_regular_file(path)) {
        fail(where, "missing rejects file " + path.string());
      } else {
        std::map<std::string, SourceTally> seen;
        for (const auto& r : read_rejects(path.string())) {
          ++seen[r.source].docs;
          seen[r.source].words += r.words;
        }
        for (const auto& src : names) {
          const SourceTally a = seen.count(src) ? seen[src] : SourceTally{};
          const auto it = s.per_source_rejected.find(src);
          const SourceTally b = it == s.per_source_rejected.end() ? SourceTally{} : it->second;
          if (a.docs != b.docs || a.words != b.words) {
            fail(where + " source " + display_source(src), "rejects file disagrees with recorded counts");
          }
        }
        for (const auto& [src, t] : seen) {
          if (!names.count(src)) fail(where + " source " + display_source(src), "rejects file has unexpected source");
        }
      }
    }
  }

  {
    const StageStats& first = *chain.front();
    const StageStats& last = *chain.back();
    if (first.words_out < removed_words || first.words_out - removed_words != last.words_out) {
      fail("totals", "initial words minus removed words != final words");
    }
    for (const auto& [src, t] : report.sources) {
      const SourceTally rm = removed_by_source.count(src) ? removed_by_source.at(src) : SourceTally{};
      if (t.docs_before != t.docs_after + rm.docs || t.words_before != t.words_after + rm.words) {
        fail("sources." + display_source(src), "before != after + removed");
      }
    }
  }
  return issues;
}

std::string corpus_stats_table(const std::vector<Document>& docs) {
  std::map<std::string, SourceTally> m;
  for (const auto& d : docs) {
    ++m[d.source].docs;
    m[d.source].words += d.word_count;
  }
  std::vector<std::vector<std::string>> rows{{"Source", "Docs", "Words"}};
  SourceTally total;
  for (const auto& [src, t] : m) {
    rows.push_back({display_source(src), std::to_string(t.docs), std::to_string(t.words)});
    total.docs += t.docs;
    total.words += t.words;
  }
  rows.push_back({"Total", std::to_string(total.docs), std::to_string(total.words)});
  return table(rows);
}

}  // namespace lvcorpus
