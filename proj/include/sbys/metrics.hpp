#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sbys {

// ------------------------------------------------------------------ chrF

// Pure character n-gram F-score (no word n-grams). Whitespace is removed
// before n-gram extraction; characters are Unicode code points.
struct ChrfConfig {
  int max_order = 6;
  double beta = 2.0;
  double eps = 1e-16;
};

struct NgramCounts {
  std::uint64_t hypothesis = 0;
  std::uint64_t reference = 0;
  std::uint64_t matches = 0;  // clipped
};

// One entry per order 1..max_order. Sums across sentences give corpus counts.
using ChrfStatistics = std::vector<NgramCounts>;

// Code points of `text` with whitespace removed. Invalid UTF-8 bytes map to
// U+FFFD one byte at a time.
std::u32string chrf_characters(std::string_view text);

ChrfStatistics chrf_statistics(std::string_view hypothesis, std::string_view reference,
                               const ChrfConfig& config = {});
// 100 x mean over orders of F_beta(P_n, R_n). Orders whose reference has
// no n-grams are left out of the mean; with none left the score is 0.
double chrf_from_statistics(const ChrfStatistics& stats, const ChrfConfig& config = {});

double chrf_sentence(std::string_view hypothesis, std::string_view reference,
                     const ChrfConfig& config = {});
// Aggregates n-gram counts over all pairs before computing F. Throws EmptyCorpus.
double chrf_corpus(std::span<const std::pair<std::string, std::string>> pairs,
                   const ChrfConfig& config = {});

// ------------------------------------------------------------------ plugins

enum class Orientation { lower_better, higher_better };
std::string_view to_string(Orientation o);
Orientation orientation_from_string(std::string_view name);

// True iff `a` is strictly better than `b`.
inline bool strictly_better(double a, double b, Orientation o) {
  return o == Orientation::higher_better ? a > b : a < b;
}
// Index of the best value; ties go to the lowest index. Empty input -> 0.
std::size_t argbest(std::span<const double> values, Orientation o);

enum class Transport { builtin, subprocess, http };
std::string_view to_string(Transport t);

struct MetricPluginSpec {
  std::string name;
  Orientation orientation = Orientation::higher_better;
  bool needs_reference = true;
  bool needs_source = false;
  Transport transport = Transport::builtin;
  std::string command;  // subprocess
  std::string url;      // http
};

// Plugin config file: {name, transport, command|url, orientation,
// needs_reference, needs_source}. Throws ConfigError with the offending key.
MetricPluginSpec plugin_spec_from_json(const nlohmann::json& j);

struct ScoreRequest {
  std::string id;
  std::string hypothesis;
  std::optional<std::string> source;
  std::optional<std::string> reference;
};

// Wire format: one JSON object per line.
//   request  {"id", "hypothesis", "source"?, "reference"?}
//   response {"id", "score"}
nlohmann::json to_wire(const ScoreRequest& r);
// Parses a JSONL response, returning one score per request id in request
// order. Throws PluginProtocolError on malformed lines, missing or
// non-finite scores.
std::vector<double> parse_score_response(std::string_view jsonl,
                                         const std::vector<ScoreRequest>& requests);

class MetricPlugin {
 public:
  explicit MetricPlugin(MetricPluginSpec spec) : spec_(std::move(spec)) {}
  virtual ~MetricPlugin() = default;
  const MetricPluginSpec& spec() const { return spec_; }
  bool usable_as_selector() const { return !spec_.needs_reference; }

  // Serialized per instance.
  std::vector<double> score(const std::vector<ScoreRequest>& requests);
  std::size_t call_count() const;

 protected:
  virtual std::vector<double> score_impl(const std::vector<ScoreRequest>& requests) = 0;

 private:
  MetricPluginSpec spec_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

// Builtin chrF against the reference.
class ChrfPlugin : public MetricPlugin {
 public:
  explicit ChrfPlugin(ChrfConfig config = {});

 protected:
  std::vector<double> score_impl(const std::vector<ScoreRequest>& requests) override;

 private:
  ChrfConfig config_;
};

// chrF of the hypothesis against the source. Reference-free, so it can stand
// in for a QE selector in tests; not a quality signal.
class ChrfPseudoQePlugin : public MetricPlugin {
 public:
  ChrfPseudoQePlugin();

 protected:
  std::vector<double> score_impl(const std::vector<ScoreRequest>& requests) override;
};

// Runs `command` once per batch with the request JSONL on stdin and reads
// the response JSONL from stdout.
class SubprocessPlugin : public MetricPlugin {
 public:
  explicit SubprocessPlugin(MetricPluginSpec spec);

 protected:
  std::vector<double> score_impl(const std::vector<ScoreRequest>& requests) override;
};

// POSTs the request JSONL to `url`; the body of the reply is the response JSONL.
class HttpPlugin : public MetricPlugin {
 public:
  explicit HttpPlugin(MetricPluginSpec spec);

 protected:
  std::vector<double> score_impl(const std::vector<ScoreRequest>& requests) override;
};

std::unique_ptr<MetricPlugin> make_plugin(const MetricPluginSpec& spec);
// "chrf", "chrf-pseudo", or a path to a plugin config file.
std::unique_ptr<MetricPlugin> make_plugin(std::string_view name_or_path);

struct ScoredDocument {
  std::string doc_id;
  std::string system;
  double value = 0.0;
  std::string metric;
};

// One ScoredDocument per hypothesis, in doc_id order. Throws MissingReference
// or PreconditionError when a map the plugin needs lacks an entry.
std::vector<ScoredDocument> score_system(
    MetricPlugin& plugin, const std::string& system,
    const std::map<std::string, std::string>& hypotheses,
    const std::optional<std::map<std::string, std::string>>& references,
    const std::optional<std::map<std::string, std::string>>& sources);

}  // namespace sbys
