#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sbys {

// WMT24 domains, plus a passthrough for anything else.
struct Domain {
  enum class Kind { literary, news, social, speech, other };

  Kind kind = Kind::other;
  std::string other_name;  // only meaningful for Kind::other

  static Domain parse(std::string_view name);
  std::string name() const;

  friend bool operator==(const Domain&, const Domain&) = default;
  friend auto operator<=>(const Domain& a, const Domain& b) {
    return a.name() <=> b.name();
  }
};

struct Segment {
  std::string doc_id;
  Domain domain;
  std::size_t index = 0;
  std::string source_text;
  std::optional<std::string> reference_text;
  std::string source_lang;
  std::string target_lang;
};

struct SegmentSpan {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
  std::size_t size() const { return last - first + 1; }
  friend bool operator==(const SegmentSpan&, const SegmentSpan&) = default;
};

// A token-capped merge of contiguous segments of one source document.
// `id` is unique per blob; `doc_id` is the originating document.
struct AssembledDocument {
  std::string id;
  std::string doc_id;
  Domain domain;
  SegmentSpan segment_span;
  std::string source_text;
  std::optional<std::string> reference_text;
  std::size_t token_count = 0;
  std::string source_lang;
  std::string target_lang;
  // Per-segment texts kept for the segment-level baselines.
  std::vector<std::string> segment_sources;
  std::vector<std::optional<std::string>> segment_references;

  friend bool operator==(const AssembledDocument&, const AssembledDocument&) = default;
};

struct CorpusStats {
  struct DomainStats {
    std::size_t documents = 0;
    std::size_t total_tokens = 0;
    double average_length() const {
      return documents == 0 ? 0.0 : static_cast<double>(total_tokens) / documents;
    }
  };
  std::map<std::string, DomainStats> per_domain;
  std::size_t total_documents = 0;
  std::size_t total_tokens = 0;
  double average_length() const {
    return total_documents == 0 ? 0.0
                                : static_cast<double>(total_tokens) / total_documents;
  }
};

enum class CorpusFormat { tsv, jsonl };

inline constexpr std::string_view kDefaultJoiner = "\n";
inline constexpr std::size_t kDefaultTokenCap = 250;

// Number of maximal runs of non-whitespace characters.
std::size_t whitespace_token_count(std::string_view text);

CorpusFormat corpus_format_from_path(const std::filesystem::path& path);

// Reads a segment-level corpus and returns it sorted by (doc_id, index).
// Throws IoError, ParseError (with 1-based line number) or DuplicateIndex.
std::vector<Segment> load_corpus(const std::filesystem::path& path, CorpusFormat format);
std::vector<Segment> parse_corpus(std::string_view content, CorpusFormat format);

// Greedy left-to-right merge within each doc_id. A segment joins the current
// blob iff the merged text stays within `cap` whitespace tokens; a single
// segment above the cap becomes its own blob.
std::vector<AssembledDocument> assemble_documents(const std::vector<Segment>& segments,
                                                  std::size_t cap = kDefaultTokenCap,
                                                  std::string_view joiner = kDefaultJoiner);

CorpusStats corpus_stats(const std::vector<AssembledDocument>& docs);

void to_json(nlohmann::json& j, const AssembledDocument& doc);
void from_json(const nlohmann::json& j, AssembledDocument& doc);

void write_assembled_jsonl(const std::filesystem::path& path,
                           const std::vector<AssembledDocument>& docs);
std::vector<AssembledDocument> read_assembled_jsonl(const std::filesystem::path& path);

// Digest over the serialized documents, recorded in run manifests.
std::string corpus_digest(const std::vector<AssembledDocument>& docs);

}  // namespace sbys
