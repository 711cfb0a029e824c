#include "sbys/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sbys/digest.hpp"
#include "sbys/error.hpp"

namespace sbys {
namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::size_t parse_index(std::string_view text, std::size_t line) {
  text = trim(text);
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(line, "index '" + std::string(text) + "' is not a nonnegative integer");
  }
  return value;
}

constexpr std::string_view kColumns[] = {"doc_id", "domain",      "index",      "source",
                                         "reference", "source_lang", "target_lang"};

std::vector<Segment> parse_tsv(std::string_view content) {
  std::vector<Segment> out;
  std::map<std::string, std::size_t> column_of;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (!header_seen) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        column_of[std::string(trim(fields[i]))] = i;
      }
      for (const auto col : kColumns) {
        if (col == "reference") continue;
        if (!column_of.contains(std::string(col))) {
          throw ParseError(line_no, "header is missing column '" + std::string(col) + "'");
        }
      }
      header_seen = true;
      continue;
    }
    auto field = [&](std::string_view name) -> std::optional<std::string_view> {
      const auto it = column_of.find(std::string(name));
      if (it == column_of.end() || it->second >= fields.size()) return std::nullopt;
      return fields[it->second];
    };
    auto required = [&](std::string_view name) {
      const auto value = field(name);
      if (!value) throw ParseError(line_no, "missing column '" + std::string(name) + "'");
      return *value;
    };
    Segment seg;
    seg.doc_id = std::string(required("doc_id"));
    seg.domain = Domain::parse(trim(required("domain")));
    seg.index = parse_index(required("index"), line_no);
    seg.source_text = std::string(required("source"));
    if (const auto ref = field("reference"); ref && !ref->empty()) {
      seg.reference_text = std::string(*ref);
    }
    seg.source_lang = std::string(trim(required("source_lang")));
    seg.target_lang = std::string(trim(required("target_lang")));
    if (seg.doc_id.empty()) throw ParseError(line_no, "empty doc_id");
    if (trim(seg.source_text).empty()) throw ParseError(line_no, "empty source text");
    out.push_back(std::move(seg));
  }
  if (!header_seen) throw ParseError(1, "missing header row");
  return out;
}

std::vector<Segment> parse_jsonl(std::string_view content) {
  std::vector<Segment> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    auto str = [&](const char* name) -> std::string {
      const auto it = obj.find(name);
      if (it == obj.end() || it->is_null()) {
        throw ParseError(line_no, std::string("missing field '") + name + "'");
      }
      if (!it->is_string()) {
        throw ParseError(line_no, std::string("field '") + name + "' must be a string");
      }
      return it->get<std::string>();
    };
    Segment seg;
    seg.doc_id = str("doc_id");
    seg.domain = Domain::parse(str("domain"));
    const auto idx = obj.find("index");
    if (idx == obj.end()) throw ParseError(line_no, "missing field 'index'");
    if (idx->is_number_unsigned()) {
      seg.index = idx->get<std::size_t>();
    } else if (idx->is_string()) {
      seg.index = parse_index(idx->get<std::string>(), line_no);
    } else {
      throw ParseError(line_no, "field 'index' must be a nonnegative integer");
    }
    seg.source_text = str("source");
    if (const auto ref = obj.find("reference"); ref != obj.end() && !ref->is_null()) {
      if (!ref->is_string()) throw ParseError(line_no, "field 'reference' must be a string");
      seg.reference_text = ref->get<std::string>();
    }
    seg.source_lang = str("source_lang");
    seg.target_lang = str("target_lang");
    if (seg.doc_id.empty()) throw ParseError(line_no, "empty doc_id");
    if (trim(seg.source_text).empty()) throw ParseError(line_no, "empty source text");
    out.push_back(std::move(seg));
  }
  return out;
}

void sort_and_validate(std::vector<Segment>& segments) {
  std::stable_sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    return a.index < b.index;
  });
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    const bool first_of_doc = i == 0 || segments[i - 1].doc_id != seg.doc_id;
    if (!first_of_doc && segments[i - 1].index == seg.index) {
      throw DuplicateIndex(seg.doc_id, seg.index);
    }
    const std::size_t expected = first_of_doc ? 0 : segments[i - 1].index + 1;
    if (seg.index != expected) {
      throw ParseError(0, "document '" + seg.doc_id + "' has non-contiguous segment indices (expected " +
                              std::to_string(expected) + ", found " + std::to_string(seg.index) + ")");
    }
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view joiner) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(joiner);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace

Domain Domain::parse(std::string_view name) {
  if (name == "literary") return {Kind::literary, {}};
  if (name == "news") return {Kind::news, {}};
  if (name == "social") return {Kind::social, {}};
  if (name == "speech") return {Kind::speech, {}};
  return {Kind::other, std::string(name)};
}

std::string Domain::name() const {
  switch (kind) {
    case Kind::literary: return "literary";
    case Kind::news: return "news";
    case Kind::social: return "social";
    case Kind::speech: return "speech";
    case Kind::other: return other_name;
  }
  return other_name;
}

std::size_t whitespace_token_count(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (const char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

CorpusFormat corpus_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".tsv") return CorpusFormat::tsv;
  if (ext == ".jsonl") return CorpusFormat::jsonl;
  throw UsageError("cannot infer corpus format from '" + path.string() +
                   "'; expected .tsv or .jsonl");
}

std::vector<Segment> parse_corpus(std::string_view content, CorpusFormat format) {
  auto segments = format == CorpusFormat::tsv ? parse_tsv(content) : parse_jsonl(content);
  sort_and_validate(segments);
  return segments;
}

std::vector<Segment> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), format);
}

std::vector<AssembledDocument> assemble_documents(const std::vector<Segment>& segments,
                                                  std::size_t cap, std::string_view joiner) {
  std::vector<AssembledDocument> out;
  std::vector<std::string> sources;
  std::vector<std::optional<std::string>> references;
  const Segment* first = nullptr;
  const Segment* last = nullptr;

  auto flush = [&] {
    if (!first) return;
    AssembledDocument doc;
    doc.doc_id = first->doc_id;
    doc.domain = first->domain;
    doc.segment_span = {first->index, last->index};
    doc.id = doc.doc_id + ":" + std::to_string(doc.segment_span.first) + "-" +
             std::to_string(doc.segment_span.last);
    doc.source_text = join(sources, joiner);
    const bool all_refs = std::all_of(references.begin(), references.end(),
                                      [](const auto& r) { return r.has_value(); });
    if (all_refs) {
      std::vector<std::string> refs;
      for (const auto& r : references) refs.push_back(*r);
      doc.reference_text = join(refs, joiner);
    }
    doc.token_count = whitespace_token_count(doc.source_text);
    doc.source_lang = first->source_lang;
    doc.target_lang = first->target_lang;
    doc.segment_sources = std::move(sources);
    doc.segment_references = std::move(references);
    out.push_back(std::move(doc));
    sources.clear();
    references.clear();
    first = last = nullptr;
  };

  for (const auto& seg : segments) {
    if (first && seg.doc_id != first->doc_id) flush();
    if (first) {
      std::string merged = join(sources, joiner);
      merged.append(joiner);
      merged.append(seg.source_text);
      if (whitespace_token_count(merged) > cap) flush();
    }
    if (!first) first = &seg;
    last = &seg;
    sources.push_back(seg.source_text);
    references.push_back(seg.reference_text);
  }
  flush();
  return out;
}

CorpusStats corpus_stats(const std::vector<AssembledDocument>& docs) {
  CorpusStats stats;
  for (const auto& doc : docs) {
    auto& d = stats.per_domain[doc.domain.name()];
    ++d.documents;
    d.total_tokens += doc.token_count;
    ++stats.total_documents;
    stats.total_tokens += doc.token_count;
  }
  return stats;
}

void to_json(nlohmann::json& j, const AssembledDocument& doc) {
  j = nlohmann::json{
      {"id", doc.id},
      {"doc_id", doc.doc_id},
      {"domain", doc.domain.name()},
      {"segment_span", {doc.segment_span.first, doc.segment_span.last}},
      {"source_text", doc.source_text},
      {"reference_text", doc.reference_text ? nlohmann::json(*doc.reference_text) : nullptr},
      {"token_count", doc.token_count},
      {"source_lang", doc.source_lang},
      {"target_lang", doc.target_lang},
      {"segment_sources", doc.segment_sources},
  };
  auto refs = nlohmann::json::array();
  for (const auto& r : doc.segment_references) {
    refs.push_back(r ? nlohmann::json(*r) : nlohmann::json(nullptr));
  }
  j["segment_references"] = std::move(refs);
}

void from_json(const nlohmann::json& j, AssembledDocument& doc) {
  doc.id = j.at("id").get<std::string>();
  doc.doc_id = j.at("doc_id").get<std::string>();
  doc.domain = Domain::parse(j.at("domain").get<std::string>());
  const auto& span = j.at("segment_span");
  doc.segment_span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
  doc.source_text = j.at("source_text").get<std::string>();
  doc.reference_text.reset();
  if (const auto it = j.find("reference_text"); it != j.end() && !it->is_null()) {
    doc.reference_text = it->get<std::string>();
  }
  doc.token_count = j.at("token_count").get<std::size_t>();
  doc.source_lang = j.at("source_lang").get<std::string>();
  doc.target_lang = j.at("target_lang").get<std::string>();
  doc.segment_sources = j.value("segment_sources", std::vector<std::string>{});
  doc.segment_references.clear();
  if (const auto it = j.find("segment_references"); it != j.end()) {
    for (const auto& r : *it) {
      doc.segment_references.push_back(r.is_null() ? std::nullopt
                                                    : std::optional(r.get<std::string>()));
    }
  }
}

void write_assembled_jsonl(const std::filesystem::path& path,
                           const std::vector<AssembledDocument>& docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& doc : docs) out << nlohmann::json(doc).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<AssembledDocument> read_assembled_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<AssembledDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      docs.push_back(nlohmann::json::parse(line).get<AssembledDocument>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("invalid assembled document: ") + e.what());
    }
  }
  return docs;
}

std::string corpus_digest(const std::vector<AssembledDocument>& docs) {
  std::string buf;
  for (const auto& doc : docs) {
    buf += nlohmann::json(doc).dump();
    buf += '\n';
  }
  return sha256_hex(buf);
}

}  // namespace sbys
