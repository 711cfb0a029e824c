#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbys/corpus.hpp"
#include "sbys/metrics.hpp"

namespace sbys {

// Provenance of one run; every field must be set before the run is reported on.
struct RunManifest {
  std::string run_id;
  std::string mode;        // sbys, zero-shot, zero-shot-seg, zero-shot-seg-ctx, maps
  std::string stage_set;   // sbys only; "none" otherwise
  std::string model_id;
  std::string source_lang;
  std::string target_lang;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> template_digests;
  std::string corpus_digest;
  std::optional<std::uint64_t> seed;
  nlohmann::json cache_stats = nlohmann::json::object();
  std::string started_at;
  std::string finished_at;
  std::size_t documents = 0;
  std::size_t failures = 0;
  // Choices the pipeline made where the method leaves room, e.g. how a
  // refinement without a draft is seeded.
  std::map<std::string, std::string> reconstructions;

  // Names of the fields still empty.
  std::vector<std::string> missing_fields() const;
  bool reportable() const { return missing_fields().empty(); }
};
void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

// UTC timestamp, ISO 8601 with seconds.
std::string utc_now_iso8601();

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& run_dir);

// doc_id -> final translation from a run's outputs.jsonl.
std::map<std::string, std::string> read_final_translations(const std::filesystem::path& run_dir);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

struct ScoreRow {
  std::string system;
  std::string doc_id;
  std::string domain;
  std::string metric;
  double value = 0.0;
  friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

// CSV with header "system,doc_id,domain,metric,value".
std::string scores_to_csv(const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> scores_from_csv(const std::string& csv);
void write_scores_csv(const std::filesystem::path& path, const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

// RFC 4180 quoting when a field holds a comma, quote or newline.
std::string csv_field(const std::string& field);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace sbys
