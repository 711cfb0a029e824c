#include "sbys/report.hpp"

#include <algorithm>
#include <set>

#include <fmt/core.h>

#include "sbys/error.hpp"

namespace sbys {
namespace {

std::size_t table_position(const StageSet& s) {
  const auto& order = ablation_configurations();
  const auto it = std::find(order.begin(), order.end(), s);
  return static_cast<std::size_t>(it - order.begin());
}

std::vector<AblationRow> ordered(std::vector<AblationRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
    const auto pa = table_position(a.stages);
    const auto pb = table_position(b.stages);
    if (pa != pb) return pa < pb;
    return a.stages.to_string() < b.stages.to_string();
  });
  return rows;
}

const AblationRow& baseline_row(const std::vector<AblationRow>& rows) {
  const AblationRow* found = nullptr;
  for (const auto& r : rows) {
    if (!r.stages.none()) continue;
    if (found) throw MissingBaselineRow("more than one all-off row");
    found = &r;
  }
  if (!found) throw MissingBaselineRow("no all-off (zero-shot) row");
  return *found;
}

std::set<std::string> languages_of(const std::vector<AblationRow>& rows) {
  std::set<std::string> langs;
  for (const auto& r : rows)
    for (const auto& [lang, v] : r.scores) langs.insert(lang);
  return langs;
}

std::optional<double> delta_for(const AblationRow& row, const AblationRow& base,
                                const std::string& lang) {
  if (row.stages.none()) return std::nullopt;
  const auto a = row.scores.find(lang);
  const auto b = base.scores.find(lang);
  if (a == row.scores.end() || b == base.scores.end()) return std::nullopt;
  return a->second - b->second;
}

const char* dot(bool on) { return on ? "●" : "○"; }

bool parse_flag(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ParseError(0, "stage flag must be 0 or 1, got '" + s + "'");
}

std::string pair_of(const RunManifest& m) { return m.source_lang + "-" + m.target_lang; }

std::map<std::string, double> metric_scores(const RunArtifacts& run, const std::string& metric) {
  std::map<std::string, double> out;
  for (const auto& r : run.scores)
    if (r.metric == metric) out[r.doc_id] = r.value;
  return out;
}

const SigtestRecord* find_sigtest(const std::vector<SigtestRecord>& tests, const std::string& a,
                                  const std::string& b, const std::string& metric) {
  for (const auto& t : tests) {
    if (t.metric != metric) continue;
    if ((t.system_a == a && t.system_b == b) || (t.system_a == b && t.system_b == a)) return &t;
  }
  return nullptr;
}

std::string fixed2(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::string significance_marker(double p_value) {
  if (p_value < 0.0001) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

std::string render_ablation_table(const std::vector<AblationRow>& input, TableFormat format) {
  const auto& base = baseline_row(input);
  const auto rows = ordered(input);
  const auto langs = languages_of(rows);
  std::string out;

  if (format == TableFormat::csv) {
    out = "research,draft,refine,proofread,language,score,delta,magnitude,significance\n";
    for (const auto& row : rows) {
      const auto flags = fmt::format("{:d},{:d},{:d},{:d}", row.stages.research, row.stages.draft,
                                     row.stages.refine, row.stages.proofread);
      if (row.scores.empty()) {
        out += flags + ",,,,,\n";
        continue;
      }
      for (const auto& [lang, score] : row.scores) {
        const auto d = delta_for(row, base, lang);
        const auto marker = row.markers.count(lang) ? row.markers.at(lang) : std::string();
        out += flags + ',' + csv_field(lang) + ',' + format_double(score) + ',' +
               (d ? format_delta(*d) : "-") + ',' +
               (d ? std::string(to_string(delta_magnitude(*d))) : "-") + ',' + csv_field(marker) +
               '\n';
      }
    }
    return out;
  }

  out = "| Research | Draft | Refine | Proofread |";
  std::string rule = "|:-:|:-:|:-:|:-:|";
  for (const auto& lang : langs) {
    out += " " + lang + " | Δ " + lang + " |";
    rule += "--:|--:|";
  }
  out += "\n" + rule + "\n";
  for (const auto& row : rows) {
    out += fmt::format("| {} | {} | {} | {} |", dot(row.stages.research), dot(row.stages.draft),
                       dot(row.stages.refine), dot(row.stages.proofread));
    for (const auto& lang : langs) {
      const auto s = row.scores.find(lang);
      out += " " + (s == row.scores.end() ? std::string() : fixed2(s->second)) + " |";
      if (row.stages.none()) {
        out += " - |";
        continue;
      }
      const auto d = delta_for(row, base, lang);
      if (!d) {
        out += "  |";
        continue;
      }
      const auto m = row.markers.find(lang);
      out += " " + format_delta(*d) + " (" + std::string(to_string(delta_magnitude(*d))) + ")" +
             (m == row.markers.end() ? "" : m->second) + " |";
    }
    out += "\n";
  }
  return out;
}

std::vector<AblationRow> parse_ablation_csv(const std::string& csv) {
  const auto table = parse_csv(csv);
  if (table.empty() || table.front().size() != 9 || table.front()[0] != "research") {
    throw ParseError(1, "expected ablation csv header");
  }
  std::vector<AblationRow> rows;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& f = table[i];
    if (f.size() != 9) throw ParseError(i + 1, "expected 9 fields");
    const StageSet s{parse_flag(f[0]), parse_flag(f[1]), parse_flag(f[2]), parse_flag(f[3])};
    if (rows.empty() || !(rows.back().stages == s)) rows.push_back({s, {}, {}});
    if (f[4].empty()) continue;
    try {
      rows.back().scores[f[4]] = std::stod(f[5]);
    } catch (const std::exception&) {
      throw ParseError(i + 1, "bad score '" + f[5] + "'");
    }
    if (!f[8].empty()) rows.back().markers[f[4]] = f[8];
  }
  return rows;
}

std::string emit_domain_plot_data(const DomainDeltas& deltas) {
  std::string out = "domain,step,delta\n";
  for (const auto& [domain, steps] : deltas) {
    for (const char* step : kPlotSteps) {
      const std::string key = step;
      if (key == "0") {
        out += csv_field(domain) + ",0,0.0000\n";
        continue;
      }
      const auto it = steps.find(key);
      if (it == steps.end()) continue;
      out += csv_field(domain) + ',' + key + ',' + fmt::format("{:.4f}", it->second) + '\n';
    }
  }
  return out;
}

RunArtifacts load_run(const std::filesystem::path& dir) {
  RunArtifacts run;
  run.dir = dir;
  run.manifest = read_manifest(dir);
  if (std::filesystem::exists(dir / "scores.csv")) run.scores = read_scores_csv(dir / "scores.csv");
  return run;
}

SigtestRecord sigtest_from_json(const nlohmann::json& j) {
  SigtestRecord r;
  r.system_a = j.at("system_a").get<std::string>();
  r.system_b = j.at("system_b").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  r.result = j.get<PermutationResult>();
  return r;
}

nlohmann::json to_json(const SigtestRecord& r) {
  nlohmann::json j = r.result;
  j["system_a"] = r.system_a;
  j["system_b"] = r.system_b;
  j["metric"] = r.metric;
  return j;
}

std::vector<SigtestRecord> load_sigtests(const std::filesystem::path& dir) {
  std::vector<SigtestRecord> out;
  if (!std::filesystem::is_directory(dir)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      out.push_back(sigtest_from_json(nlohmann::json::parse(read_text(f))));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(0, f.string() + ": " + e.what());
    }
  }
  return out;
}

DomainDeltas step_domain_deltas(const ReportInputs& inputs) {
  const auto& order = ablation_configurations();
  const std::map<std::string, StageSet> steps = {
      {"0", order[0]}, {"D", order[4]}, {"R", order[5]}, {"P", order[6]}};
  SystemScores scores;
  std::map<std::string, std::string> domains;
  for (const auto& run : inputs.runs) {
    if (run.manifest.mode != "sbys") continue;
    const auto stages = StageSet::parse(run.manifest.stage_set);
    for (const auto& [label, s] : steps) {
      if (!(s == stages)) continue;
      const auto pair = pair_of(run.manifest);
      for (const auto& r : run.scores) {
        if (r.metric != inputs.metric) continue;
        const auto key = pair + "/" + r.doc_id;
        scores[label][key] = r.value;
        if (!r.domain.empty()) domains[key] = r.domain;
      }
    }
  }
  if (!scores.count("0")) throw MissingBaselineRow("no zero-shot sbys run to compare against");
  std::vector<std::string> others;
  for (const auto& [label, per_doc] : scores) {
    if (label == "0") continue;
    // A step only counts when it covers the same documents as the baseline.
    std::set<std::string> a, b;
    for (const auto& [k, v] : per_doc) a.insert(k);
    for (const auto& [k, v] : scores.at("0")) b.insert(k);
    if (a == b) others.push_back(label);
  }
  return per_domain_deltas("0", others, scores, domains);
}

std::string render_report(const ReportInputs& inputs) {
  if (inputs.runs.empty()) throw PreconditionError("report needs at least one run");
  for (const auto& run : inputs.runs) {
    const auto missing = run.manifest.missing_fields();
    if (!missing.empty()) {
      std::string names;
      for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
      throw PreconditionError("run '" + run.manifest.run_id + "' is not reportable; missing " +
                              names);
    }
  }
  std::vector<const RunArtifacts*> runs;
  for (const auto& r : inputs.runs) runs.push_back(&r);
  std::sort(runs.begin(), runs.end(), [](const auto* a, const auto* b) {
    return a->manifest.run_id < b->manifest.run_id;
  });

  std::string out = "# Translation report\n\nMetric: " + inputs.metric + "\n\n## Runs\n\n";
  out += "| run | mode | stages | model | pair | documents | failures | scored | mean |\n";
  out += "|---|---|---|---|---|--:|--:|--:|--:|\n";
  for (const auto* run : runs) {
    const auto& m = run->manifest;
    const auto per_doc = metric_scores(*run, inputs.metric);
    out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", m.run_id, m.mode,
                       m.stage_set, m.model_id, pair_of(m), m.documents, m.failures,
                       per_doc.size(), per_doc.empty() ? "" : fixed2(mean_score(per_doc)));
  }

  out += "\n## Provenance\n\n| run | corpus digest | seed | cache hits | cache misses |\n";
  out += "|---|---|--:|--:|--:|\n";
  for (const auto* run : runs) {
    const auto& m = run->manifest;
    out += fmt::format("| {} | {} | {} | {} | {} |\n", m.run_id, m.corpus_digest.substr(0, 16),
                       *m.seed, m.cache_stats.value("hits", 0), m.cache_stats.value("misses", 0));
  }

  // Ablation table over the sbys runs, when a zero-shot row exists.
  std::map<std::string, AblationRow> by_stages;
  std::map<std::string, std::string> baseline_run;  // pair -> run id
  for (const auto* run : runs) {
    const auto& m = run->manifest;
    if (m.mode != "sbys") continue;
    const auto per_doc = metric_scores(*run, inputs.metric);
    if (per_doc.empty()) continue;
    auto& row = by_stages[m.stage_set];
    row.stages = StageSet::parse(m.stage_set);
    row.scores[pair_of(m)] = mean_score(per_doc);
    if (row.stages.none()) baseline_run[pair_of(m)] = m.run_id;
  }
  if (by_stages.count("none")) {
    for (const auto* run : runs) {
      const auto& m = run->manifest;
      if (m.mode != "sbys" || m.stage_set == "none" || !by_stages.count(m.stage_set)) continue;
      const auto base = baseline_run.find(pair_of(m));
      if (base == baseline_run.end()) continue;
      if (const auto* t = find_sigtest(inputs.sigtests, m.run_id, base->second, inputs.metric)) {
        by_stages[m.stage_set].markers[pair_of(m)] = significance_marker(t->result.p_value);
      }
    }
    std::vector<AblationRow> rows;
    for (auto& [k, row] : by_stages) rows.push_back(row);
    out += "\n## Stage ablation\n\n" + render_ablation_table(rows, TableFormat::markdown);
    out += "\n`*` p < 0.05, `**` p < 0.0001 against the zero-shot row.\n";
  }

  if (!inputs.sigtests.empty()) {
    out += "\n## Significance tests\n\n";
    out += "| A | B | metric | mean(A-B) | p | resamples | seed | alternative |\n";
    out += "|---|---|---|--:|--:|--:|--:|---|\n";
    for (const auto& t : inputs.sigtests) {
      const auto& r = t.result;
      out += fmt::format("| {} | {} | {} | {} | {:.6f} | {} | {} | {} |\n", t.system_a, t.system_b,
                         t.metric, format_delta(r.observed_stat), r.p_value,
                         r.exact ? fmt::format("exact ({})", r.n_resamples)
                                 : std::to_string(r.n_resamples),
                         r.seed, to_string(r.alternative));
    }
  }

  try {
    const auto deltas = step_domain_deltas(inputs);
    if (!deltas.empty()) {
      out += "\n## Domain deltas from zero-shot\n\n| domain |";
      std::string rule = "|---|";
      for (const char* s : kPlotSteps) {
        out += std::string(" ") + s + " |";
        rule += "--:|";
      }
      out += "\n" + rule + "\n";
      for (const auto& [domain, steps] : deltas) {
        out += "| " + domain + " | +0.00 |";
        for (const char* s : kPlotSteps) {
          if (std::string(s) == "0") continue;
          const auto it = steps.find(s);
          out += " " + (it == steps.end() ? std::string() : format_delta(it->second)) + " |";
        }
        out += "\n";
      }
    }
  } catch (const MissingBaselineRow&) {
  } catch (const MissingDomain&) {
  }
  return out;
}

}  // namespace sbys
