#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbys/pipeline.hpp"
#include "sbys/run_io.hpp"
#include "sbys/stats.hpp"

namespace sbys {

// One line of the stage ablation table. Deltas are computed against the
// all-off row at render time.
struct AblationRow {
  StageSet stages;
  std::map<std::string, double> scores;        // language pair -> score
  std::map<std::string, std::string> markers;  // language pair -> significance marker

  friend bool operator==(const AblationRow&, const AblationRow&) = default;
};

enum class TableFormat { markdown, csv };

// Rows come out in ablation-table order; stage sets outside the seven
// standard rows follow in StageSet::to_string order. Throws
// MissingBaselineRow unless exactly one all-off row is present.
std::string render_ablation_table(const std::vector<AblationRow>& rows, TableFormat format);

// Inverse of the csv rendering.
std::vector<AblationRow> parse_ablation_csv(const std::string& csv);

// "**" for p < 0.0001, "*" for p < 0.05, "" otherwise.
std::string significance_marker(double p_value);

// Plot steps: 0 zero-shot, D draft after research, R refinement, P proofreading.
inline constexpr const char* kPlotSteps[] = {"0", "D", "R", "P"};

// Long-form CSV "domain,step,delta". `deltas` maps domain -> step -> delta;
// step 0 is always written as 0 and other missing steps are skipped.
std::string emit_domain_plot_data(const DomainDeltas& deltas);

// Inputs for report.md, all read from disk.
struct RunArtifacts {
  std::filesystem::path dir;
  RunManifest manifest;
  std::vector<ScoreRow> scores;
};
RunArtifacts load_run(const std::filesystem::path& dir);

struct SigtestRecord {
  std::string system_a;
  std::string system_b;
  std::string metric;
  PermutationResult result;
};
SigtestRecord sigtest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SigtestRecord& r);
// Every *.json under `dir`, sorted by file name. Missing dir -> empty.
std::vector<SigtestRecord> load_sigtests(const std::filesystem::path& dir);

struct ReportInputs {
  std::vector<RunArtifacts> runs;
  std::vector<SigtestRecord> sigtests;
  std::string metric = "chrf";
  std::optional<std::string> baseline;  // run id
};

// report.md text. A pure function of the inputs; no scores are recomputed,
// only averaged.
std::string render_report(const ReportInputs& inputs);

// domain -> step -> delta for the sbys runs in `inputs`, against the
// zero-shot (all-off) run. Step D is research+draft, R adds refine, P is the
// full pipeline. Throws MissingBaselineRow without a zero-shot run.
DomainDeltas step_domain_deltas(const ReportInputs& inputs);

}  // namespace sbys
