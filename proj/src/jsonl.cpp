#include "lvcorpus/jsonl.hpp"

#include <charconv>
#include <cstdio>

#include "lvcorpus/error.hpp"
#include "lvcorpus/text.hpp"

namespace lvcorpus {

using nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

}  // namespace

std::string serialize_document(const Document& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["source"] = doc.source;
  j["url"] = doc.url ? ordered_json(*doc.url) : ordered_json(nullptr);
  j["text"] = doc.text;
  std::map<std::string, std::string> meta = doc.meta;
  if (doc.token_count) meta[kTokenCountKey] = std::to_string(*doc.token_count);
  if (doc.perplexity) meta[kPerplexityKey] = format_double(*doc.perplexity);
  auto m = ordered_json::object();
  for (const auto& [k, v] : meta) m[k] = v;
  j["meta"] = std::move(m);
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::strict);
}

std::optional<Document> parse_document(const std::string& line, std::string& reason) {
  if (!is_valid_utf8(line)) {
    reason = "invalid_utf8";
    return std::nullopt;
  }
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error&) {
    reason = "malformed_json";
    return std::nullopt;
  }
  if (!j.is_object()) {
    reason = "malformed_json";
    return std::nullopt;
  }
  Document d;
  const auto id = j.find("id");
  if (id == j.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
    reason = "missing_id";
    return std::nullopt;
  }
  d.id = id->get<std::string>();
  const auto text = j.find("text");
  if (text == j.end() || !text->is_string()) {
    reason = "missing_text";
    return std::nullopt;
  }
  d.text = text->get<std::string>();
  if (const auto src = j.find("source"); src != j.end()) {
    if (!src->is_string()) {
      reason = "bad_field";
      return std::nullopt;
    }
    d.source = src->get<std::string>();
  }
  if (const auto url = j.find("url"); url != j.end() && !url->is_null()) {
    if (!url->is_string()) {
      reason = "bad_field";
      return std::nullopt;
    }
    d.url = url->get<std::string>();
  }
  if (const auto meta = j.find("meta"); meta != j.end() && !meta->is_null()) {
    if (!meta->is_object()) {
      reason = "bad_field";
      return std::nullopt;
    }
    for (const auto& [k, v] : meta->items()) {
      if (!v.is_string()) {
        reason = "bad_field";
        return std::nullopt;
      }
      d.meta[k] = v.get<std::string>();
    }
  }
  if (const auto it = d.meta.find(kTokenCountKey); it != d.meta.end()) {
    std::size_t n = 0;
    if (!parse_number(it->second, n)) {
      reason = "bad_field";
      return std::nullopt;
    }
    d.token_count = n;
    d.meta.erase(it);
  }
  if (const auto it = d.meta.find(kPerplexityKey); it != d.meta.end()) {
    double v = 0;
    if (!parse_number(it->second, v)) {
      reason = "bad_field";
      return std::nullopt;
    }
    d.perplexity = v;
    d.meta.erase(it);
  }
  d.refresh_word_count();
  return d;
}

JsonlReader::JsonlReader(std::string path) : path_(std::move(path)), in_(path_, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path_ + " for reading");
}

std::optional<Document> JsonlReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string reason;
    auto doc = parse_document(line, reason);
    if (!doc) {
      diagnostics_.push_back({line_no_, std::move(reason), {}});
      continue;
    }
    if (!seen_ids_.insert(doc->id).second) {
      diagnostics_.push_back({line_no_, "duplicate_id", doc->id});
      continue;
    }
    return doc;
  }
  if (in_.bad()) {
    throw IoError("read failure on " + path_ + " at line " + std::to_string(line_no_ + 1));
  }
  return std::nullopt;
}

JsonlWriter::JsonlWriter(std::string path) : path_(std::move(path)), out_(path_, std::ios::binary) {
  if (!out_) throw IoError("cannot open " + path_ + " for writing");
}

JsonlWriter::~JsonlWriter() {
  if (out_.is_open()) out_.close();
}

void JsonlWriter::write(const Document& doc) { write_line(serialize_document(doc)); }

void JsonlWriter::write_line(const std::string& line) {
  ++line_no_;
  out_ << line << '\n';
  if (!out_) {
    throw IoError("write failure on " + path_ + " at line " + std::to_string(line_no_));
  }
}

void JsonlWriter::close() {
  out_.flush();
  if (!out_) throw IoError("flush failure on " + path_);
  out_.close();
}

ReadResult read_jsonl(const std::string& path) {
  JsonlReader reader(path);
  ReadResult result;
  while (auto doc = reader.next()) result.docs.push_back(std::move(*doc));
  result.diagnostics = reader.diagnostics();
  return result;
}

void write_jsonl(const std::vector<Document>& docs, const std::string& path) {
  JsonlWriter w(path);
  for (const auto& d : docs) w.write(d);
  w.close();
}

std::string serialize_reject(const Reject& r) {
  ordered_json j;
  j["id"] = r.id;
  j["stage"] = r.stage;
  j["reason"] = r.reason;
  j["source"] = r.source;
  j["words"] = r.words;
  if (r.kept) j["kept"] = *r.kept;
  if (r.line) j["line"] = *r.line;
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

Reject parse_reject(const std::string& line) {
  const auto j = ordered_json::parse(line);
  Reject r;
  r.id = j.at("id").get<std::string>();
  r.stage = j.at("stage").get<std::string>();
  r.reason = j.at("reason").get<std::string>();
  r.source = j.value("source", std::string{});
  r.words = j.value("words", std::size_t{0});
  if (j.contains("kept")) r.kept = j["kept"].get<std::string>();
  if (j.contains("line")) r.line = j["line"].get<std::size_t>();
  return r;
}

void write_rejects(const std::vector<Reject>& rejects, const std::string& path) {
  JsonlWriter w(path);
  for (const auto& r : rejects) w.write_line(serialize_reject(r));
  w.close();
}

std::vector<Reject> read_rejects(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::vector<Reject> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(parse_reject(line));
    } catch (const std::exception& e) {
      throw FormatError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lvcorpus
