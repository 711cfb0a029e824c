#include "sbys/cli.hpp"

#include <algorithm>
#include <iostream>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "sbys/baselines.hpp"
#include "sbys/batch.hpp"
#include "sbys/config.hpp"
#include "sbys/error.hpp"
#include "sbys/pipeline.hpp"
#include "sbys/report.hpp"
#include "sbys/run_io.hpp"
#include "sbys/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sbys {

MockBackend::Responder corpus_mock_responder(std::vector<AssembledDocument> docs) {
  auto by_id = std::make_shared<std::map<std::string, AssembledDocument>>();
  for (auto& d : docs) (*by_id)[d.id] = std::move(d);
  return [by_id](const Conversation& conv) -> std::string {
    const auto& tag = conv.messages.back().template_tag;
    const auto& stage = conv.created_for.stage;
    const auto it = by_id->find(conv.created_for.doc_id);
    std::string source = it == by_id->end() ? "translation" : it->second.source_text;
    // Segment-level stages are tagged "<template>#<index>".
    if (const auto hash = stage.find('#'); hash != std::string::npos && it != by_id->end()) {
      const auto index = std::stoul(stage.substr(hash + 1));
      const auto& d = it->second;
      if (index >= d.segment_span.first && index <= d.segment_span.last) {
        source = d.segment_sources.at(index - d.segment_span.first);
      }
    }
    if (tag == "research") return "Idiomatic expressions:\n- none identified";
    if (tag == "draft_json" || tag == "reask") {
      return json{{"idiomatic_expressions", json::array()}, {"draft_translation", source}}.dump();
    }
    if (tag == "maps_keywords") return "Keyword Pairs: none";
    if (tag == "maps_topic") return "Topic: general";
    if (tag == "maps_demo") return "Related translation: none";
    return source;
  };
}

namespace {

struct Globals {
  std::optional<std::string> config;
  std::optional<std::string> cache;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> concurrency;
  std::optional<std::string> backend;
  std::optional<std::string> model;
  std::optional<std::string> prompt_variant;
  std::optional<std::string> prompts_dir;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig c = g.config ? load_config(*g.config) : RunConfig{};
  if (g.cache) c.cache = *g.cache;
  if (g.seed) c.seed = *g.seed;
  if (g.concurrency) c.concurrency = std::max<std::size_t>(1, *g.concurrency);
  if (g.backend) c.backend.kind = backend_kind_from_string(*g.backend);
  if (g.model) c.backend.model_id = *g.model;
  if (g.prompt_variant) {
    c.prompt_variant =
        *g.prompt_variant == "revised" ? PromptVariant::revised : PromptVariant::verbatim;
  }
  if (g.prompts_dir) c.prompts_dir = *g.prompts_dir;
  if (c.backend.kind == BackendKind::http_chat && !c.backend.endpoint) {
    throw ConfigError("config.backend.endpoint: required for the http backend");
  }
  return c;
}

struct BackendHandle {
  std::shared_ptr<ChatBackend> backend;
  std::shared_ptr<ResponseCache> cache;

  json stats() const {
    if (const auto cached = std::dynamic_pointer_cast<CachedBackend>(backend)) {
      return cached->stats();
    }
    return json{{"enabled", false}};
  }
};

BackendHandle open_backend(const RunConfig& c, const std::vector<AssembledDocument>& docs) {
  BackendHandle h;
  if (c.cache) {
    if (c.cache->has_parent_path()) fs::create_directories(c.cache->parent_path());
    h.cache = std::make_shared<ResponseCache>(*c.cache);
  }
  h.backend = make_backend(c.backend, h.cache, corpus_mock_responder(docs));
  return h;
}

std::vector<AssembledDocument> load_documents(const fs::path& path) {
  return read_assembled_jsonl(path);
}

// Assembled JSONL, or a segment corpus assembled on the fly.
std::vector<AssembledDocument> load_any_corpus(const fs::path& path, std::size_t cap) {
  if (path.extension() == ".jsonl") {
    const auto lines = read_jsonl(path);
    if (!lines.empty() && lines.front().contains("segment_span")) return load_documents(path);
  }
  return assemble_documents(load_corpus(path, corpus_format_from_path(path)), cap);
}

RunManifest base_manifest(const fs::path& run_dir, const RunConfig& c, const std::string& mode,
                          const TemplateRegistry& templates, const ChatBackend& backend,
                          const std::vector<AssembledDocument>& docs) {
  RunManifest m;
  m.run_id = run_dir.filename().string();
  m.mode = mode;
  m.stage_set = "none";
  m.model_id = backend.model_id();
  m.config = to_json(c);
  m.template_digests = templates.all_digests();
  m.corpus_digest = corpus_digest(docs);
  m.seed = c.seed;
  m.started_at = utc_now_iso8601();
  if (!docs.empty()) {
    m.source_lang = docs.front().source_lang;
    m.target_lang = docs.front().target_lang;
  }
  return m;
}

json failure_json(const DocumentFailure& f) { return f; }

void write_run(const fs::path& run_dir, const std::vector<json>& outputs,
               const std::vector<json>& conversations, const std::vector<json>& timings,
               const std::vector<DocumentFailure>& failures) {
  fs::create_directories(run_dir);
  write_jsonl(run_dir / "outputs.jsonl", outputs);
  write_jsonl(run_dir / "conversations.jsonl", conversations);
  write_jsonl(run_dir / "timings.jsonl", timings);
  std::vector<json> errs;
  for (const auto& f : failures) errs.push_back(failure_json(f));
  write_jsonl(run_dir / "errors.jsonl", errs);
}

// ---------------------------------------------------------------- commands

int cmd_assemble(const Globals& g, const std::string& input, const std::string& format,
                 std::optional<std::size_t> cap, const std::string& out) {
  const auto c = resolve_config(g);
  const auto fmt_kind = format.empty()  ? corpus_format_from_path(input)
                        : format == "tsv" ? CorpusFormat::tsv
                                          : CorpusFormat::jsonl;
  const auto segments = load_corpus(input, fmt_kind);
  const auto docs = assemble_documents(segments, cap.value_or(c.cap));
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  write_assembled_jsonl(out, docs);
  fmt::print("assembled {} documents from {} segments -> {}\n", docs.size(), segments.size(), out);
  return 0;
}

int cmd_stats(const Globals& g, const std::string& input, std::optional<std::size_t> cap,
              bool as_json) {
  const auto c = resolve_config(g);
  const auto docs = load_any_corpus(input, cap.value_or(c.cap));
  const auto s = corpus_stats(docs);
  if (as_json) {
    json j = {{"documents", s.total_documents}, {"average_length", s.average_length()}};
    for (const auto& [domain, d] : s.per_domain) {
      j["domains"][domain] = {{"documents", d.documents}, {"average_length", d.average_length()}};
    }
    fmt::print("{}\n", j.dump(2));
    return 0;
  }
  fmt::print("| domain | documents | average length |\n|---|--:|--:|\n");
  for (const auto& [domain, d] : s.per_domain) {
    fmt::print("| {} | {} | {:.0f} |\n", domain, d.documents, d.average_length());
  }
  fmt::print("| all | {} | {:.0f} |\n", s.total_documents, s.average_length());
  return 0;
}

struct TranslateArgs {
  std::string corpus;
  std::string run_dir;
  std::string mode = "sbys";
  std::string stages = "all";
  bool extract = false;
  std::optional<std::string> selector;
  std::optional<std::string> selector_mode;
  std::optional<std::string> demos;
  std::optional<std::size_t> limit;
  std::optional<std::size_t> cap;
};

int cmd_translate(const Globals& g, const TranslateArgs& a) {
  static const std::set<std::string> modes = {"sbys", "zero-shot", "zero-shot-seg",
                                              "zero-shot-seg-ctx", "maps"};
  if (!modes.count(a.mode)) throw UsageError("unknown mode '" + a.mode + "'");
  auto c = resolve_config(g);
  if (a.selector) c.maps_selector = *a.selector;
  if (a.selector_mode) {
    if (*a.selector_mode == "qe") {
      c.maps_selector_mode = SelectorMode::qe;
    } else if (*a.selector_mode == "reference") {
      c.maps_selector_mode = SelectorMode::reference;
    } else {
      throw UsageError("--selector-mode must be qe or reference");
    }
  }
  if (a.demos) c.maps_demonstrations = *a.demos;

  auto docs = load_any_corpus(a.corpus, a.cap.value_or(c.cap));
  if (a.limit && *a.limit < docs.size()) docs.resize(*a.limit);
  const auto templates = make_templates(c);
  const auto handle = open_backend(c, docs);
  TranslationContext ctx{templates, *handle.backend, c.generation, make_languages(c)};
  const fs::path run_dir = a.run_dir;
  fs::create_directories(run_dir);

  std::vector<json> outputs, conversations, timings;
  std::vector<DocumentFailure> failures;
  RunManifest manifest = base_manifest(run_dir, c, a.mode, templates, *handle.backend, docs);

  if (a.mode == "sbys") {
    const auto stages = StageSet::parse(a.stages);
    if (!stages.valid()) {
      throw UsageError("invalid --stages '" + a.stages +
                       "': research requires draft and proofread requires refine");
    }
    BatchOptions options{c.concurrency, PipelineOptions{a.extract}};
    auto batch = run_batch(docs, stages, ctx, options);
    manifest.stage_set = batch.manifest.stage_set;
    manifest.reconstructions = batch.manifest.reconstructions;
    for (const auto& o : batch.outputs) {
      outputs.push_back(o);
      for (const auto& conv : o.conversations) conversations.push_back(conv);
      timings.push_back({{"doc_id", o.doc_id}, {"timings_ms", o.timings_ms}});
    }
    failures = std::move(batch.failures);
  } else {
    std::unique_ptr<MetricPlugin> selector;
    MapsDemonstrations demos;
    if (a.mode == "maps") {
      selector = make_plugin(c.maps_selector);
      if (c.maps_demonstrations) demos = MapsDemonstrations::load(*c.maps_demonstrations);
      manifest.reconstructions["maps_templates"] =
          "MAPS prompts are reconstructions; wording is configurable";
    }
    struct Slot {
      std::optional<json> output;
      std::vector<Conversation> conversations;
      double ms = 0;
      std::optional<DocumentFailure> failure;
    };
    std::vector<Slot> slots(docs.size());
    parallel_for(docs.size(), c.concurrency, [&](std::size_t i) {
      const auto& doc = docs[i];
      auto& slot = slots[i];
      const auto started = std::chrono::steady_clock::now();
      try {
        json out = {{"doc_id", doc.id}, {"mode", a.mode}};
        if (a.mode == "zero-shot") {
          auto r = zero_shot_exchange(doc, ctx);
          out["final"] = r.translation;
          slot.conversations.push_back(std::move(r.conversation));
        } else if (a.mode == "maps") {
          auto set = maps_translate(doc, ctx, *selector, demos, c.maps_selector_mode);
          json cands = json::array();
          for (const auto& cand : set.candidates) {
            cands.push_back({{"kind", to_string(cand.kind)},
                             {"knowledge", cand.knowledge},
                             {"translation", cand.translation}});
          }
          out["candidates"] = cands;
          out["selected"] = set.selected;
          out["selector"] = set.selector;
          out["selector_mode"] = to_string(set.mode);
          out["selector_scores"] = set.selector_scores;
          out["final"] = set.translation();
          slot.conversations = std::move(set.conversations);
        } else {
          auto r = segment_level_document(doc, ctx, a.mode == "zero-shot-seg-ctx");
          out["segments"] = r.per_segment;
          out["final"] = r.document_translation;
          slot.conversations = std::move(r.conversations);
        }
        slot.output = std::move(out);
      } catch (const Error& e) {
        std::string stage = a.mode;
        if (const auto* empty = dynamic_cast<const EmptyTranslation*>(&e)) stage = empty->stage();
        slot.failure = DocumentFailure{doc.id, stage, e.kind(), e.what()};
      } catch (const std::exception& e) {
        slot.failure = DocumentFailure{doc.id, a.mode, "InternalError", e.what()};
      }
      slot.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          started)
                    .count();
    });
    for (std::size_t i = 0; i < docs.size(); ++i) {
      auto& slot = slots[i];
      if (slot.output) {
        outputs.push_back(std::move(*slot.output));
        for (const auto& conv : slot.conversations) conversations.push_back(conv);
        timings.push_back({{"doc_id", docs[i].id}, {"timings_ms", {{a.mode, slot.ms}}}});
      }
      if (slot.failure) failures.push_back(std::move(*slot.failure));
    }
  }

  write_run(run_dir, outputs, conversations, timings, failures);
  manifest.documents = docs.size();
  manifest.failures = failures.size();
  manifest.cache_stats = handle.stats();
  manifest.finished_at = utc_now_iso8601();
  write_manifest(run_dir, manifest);
  fmt::print("{}: {} documents, {} failed -> {}\n", a.mode, docs.size(), failures.size(),
             run_dir.string());
  for (const auto& f : failures) {
    fmt::print(stderr, "failed {} [{}] {}: {}\n", f.doc_id, f.stage, f.kind, f.message);
  }
  return failures.empty() ? 0 : 1;
}

int cmd_extract(const Globals& g, const std::string& run_dir_arg, const std::string& corpus) {
  const auto c = resolve_config(g);
  const fs::path run_dir = run_dir_arg;
  const auto docs = corpus.empty() ? std::vector<AssembledDocument>{} : load_documents(corpus);
  const auto templates = make_templates(c);
  const auto handle = open_backend(c, docs);
  TranslationContext ctx{templates, *handle.backend, c.generation, make_languages(c)};

  std::vector<Conversation> prefixes;
  for (const auto& j : read_jsonl(run_dir / "conversations.jsonl")) {
    auto conv = j.get<Conversation>();
    if (conv.created_for.stage != "main") continue;
    // Keep the research/draft turns only.
    std::vector<ChatMessage> kept;
    for (std::size_t i = 0; i < conv.messages.size(); i += 2) {
      const auto& tag = conv.messages[i].template_tag;
      if (tag != "research" && tag != "drafting") break;
      kept.push_back(conv.messages[i]);
      if (i + 1 < conv.messages.size()) kept.push_back(conv.messages[i + 1]);
    }
    if (kept.empty()) continue;
    conv.messages = std::move(kept);
    prefixes.push_back(std::move(conv));
  }

  struct Slot {
    json record;
    Conversation archive;
    std::optional<DocumentFailure> failure;
  };
  std::vector<Slot> slots(prefixes.size());
  parallel_for(prefixes.size(), c.concurrency, [&](std::size_t i) {
    const auto& doc_id = prefixes[i].created_for.doc_id;
    auto& slot = slots[i];
    slot.record = {{"doc_id", doc_id}};
    try {
      slot.record["artifacts"] = extract_artifacts(prefixes[i], ctx, &slot.archive);
    } catch (const ParseFailure& e) {
      slot.record["artifacts"] = nullptr;
      slot.record["extraction_error"] = e.what();
      slot.failure = DocumentFailure{doc_id, "extract", e.kind(), e.what()};
    } catch (const Error& e) {
      slot.record["artifacts"] = nullptr;
      slot.record["extraction_error"] = e.what();
      slot.failure = DocumentFailure{doc_id, "extract", e.kind(), e.what()};
    }
  });
  std::vector<json> records, archives, errors;
  for (auto& s : slots) {
    records.push_back(std::move(s.record));
    if (!s.archive.empty()) archives.push_back(s.archive);
    if (s.failure) errors.push_back(*s.failure);
  }
  write_jsonl(run_dir / "artifacts.jsonl", records);
  write_jsonl(run_dir / "extract_conversations.jsonl", archives);
  write_jsonl(run_dir / "extract_errors.jsonl", errors);
  fmt::print("extracted artifacts for {} documents, {} failed\n", records.size(), errors.size());
  return errors.empty() ? 0 : 1;
}

int cmd_score(const Globals& g, const std::string& run_dir_arg, const std::string& corpus,
              const std::string& metric, std::optional<std::string> system) {
  (void)resolve_config(g);
  const fs::path run_dir = run_dir_arg;
  const auto docs = load_documents(corpus);
  const auto manifest = read_manifest(run_dir);
  const auto name = system.value_or(manifest.run_id);
  const auto hyps = read_final_translations(run_dir);
  auto plugin = make_plugin(metric);

  std::map<std::string, std::string> refs, srcs, domains;
  for (const auto& d : docs) {
    if (d.reference_text) refs[d.id] = *d.reference_text;
    srcs[d.id] = d.source_text;
    domains[d.id] = d.domain.name();
  }
  std::optional<std::map<std::string, std::string>> refs_arg, srcs_arg;
  if (plugin->spec().needs_reference) refs_arg = refs;
  if (plugin->spec().needs_source) srcs_arg = srcs;
  const auto scored = score_system(*plugin, name, hyps, refs_arg, srcs_arg);

  std::vector<ScoreRow> rows;
  const auto path = run_dir / "scores.csv";
  if (fs::exists(path)) {
    for (auto& r : read_scores_csv(path)) {
      if (!(r.system == name && r.metric == plugin->spec().name)) rows.push_back(std::move(r));
    }
  }
  for (const auto& s : scored) {
    const auto d = domains.find(s.doc_id);
    rows.push_back({s.system, s.doc_id, d == domains.end() ? "" : d->second, s.metric, s.value});
  }
  std::sort(rows.begin(), rows.end(), [](const ScoreRow& x, const ScoreRow& y) {
    return std::tie(x.system, x.metric, x.doc_id) < std::tie(y.system, y.metric, y.doc_id);
  });
  write_scores_csv(path, rows);
  std::map<std::string, double> per_doc;
  for (const auto& s : scored) per_doc[s.doc_id] = s.value;
  fmt::print("{} {}: {} documents, mean {:.2f}\n", name, plugin->spec().name, scored.size(),
             mean_score(per_doc));
  return 0;
}

std::map<std::string, double> run_metric_scores(const fs::path& run_dir, const std::string& metric,
                                                std::string* system) {
  const auto manifest = read_manifest(run_dir);
  *system = manifest.run_id;
  std::map<std::string, double> out;
  for (const auto& r : read_scores_csv(run_dir / "scores.csv")) {
    if (r.metric == metric && r.system == manifest.run_id) out[r.doc_id] = r.value;
  }
  if (out.empty()) {
    throw PreconditionError("run '" + manifest.run_id + "' has no " + metric + " scores");
  }
  return out;
}

int cmd_sigtest(const Globals& g, const std::string& run_a, const std::string& run_b,
                const std::string& metric, const std::string& alternative,
                std::optional<std::string> orientation, std::size_t resamples,
                std::optional<std::string> out) {
  const auto c = resolve_config(g);
  std::string name_a, name_b;
  const auto a = run_metric_scores(run_a, metric, &name_a);
  const auto b = run_metric_scores(run_b, metric, &name_b);
  Orientation o = Orientation::higher_better;
  if (orientation) {
    o = orientation_from_string(*orientation);
  } else {
    o = make_plugin(metric)->spec().orientation;
  }
  PermutationOptions options;
  options.alternative = alternative_from_string(alternative);
  options.n_resamples = resamples;
  options.seed = c.seed;
  options.threads = c.concurrency;
  SigtestRecord record{name_a, name_b, metric,
                       paired_permutation_test(pair_scores(name_a, a, name_b, b, o), options)};
  const auto text = to_json(record).dump(2) + "\n";
  if (out) {
    const fs::path p = *out;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text(p, text);
  }
  fmt::print("{}", text);
  return 0;
}

int cmd_report(const Globals& g, const std::vector<std::string>& run_dirs,
               const std::string& metric, std::optional<std::string> sigtests,
               std::optional<std::string> out_dir) {
  (void)resolve_config(g);
  ReportInputs inputs;
  inputs.metric = metric;
  for (const auto& d : run_dirs) inputs.runs.push_back(load_run(d));
  const fs::path out = out_dir ? fs::path(*out_dir) : fs::path(run_dirs.front());
  inputs.sigtests = load_sigtests(sigtests ? fs::path(*sigtests) : out / "sigtests");
  fs::create_directories(out);
  write_text(out / "report.md", render_report(inputs));
  try {
    write_text(out / "domain_deltas.csv", emit_domain_plot_data(step_domain_deltas(inputs)));
  } catch (const MissingBaselineRow&) {
  } catch (const MissingDomain& e) {
    fmt::print(stderr, "domain deltas skipped: {}\n", e.what());
  }
  fmt::print("wrote {}\n", (out / "report.md").string());
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Step-by-step document translation and evaluation harness", "sbys"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--cache", g.cache, "record/replay cache (JSONL)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--concurrency", g.concurrency, "parallel documents");
  app.add_option("--backend", g.backend, "mock, replay or http");
  app.add_option("--model", g.model, "model id");
  app.add_option("--prompt-variant", g.prompt_variant, "verbatim or revised")
      ->check(CLI::IsMember({"verbatim", "revised"}));
  app.add_option("--prompts-dir", g.prompts_dir, "directory of <id>.txt template overrides");

  std::string input, format, out = "assembled.jsonl";
  std::optional<std::size_t> cap;
  auto* assemble = app.add_subcommand("assemble", "merge segments into capped documents");
  assemble->add_option("--input", input, "segment corpus (.tsv or .jsonl)")->required();
  assemble->add_option("--format", format, "tsv or jsonl")->check(CLI::IsMember({"tsv", "jsonl"}));
  assemble->add_option("--cap", cap, "whitespace-token cap");
  assemble->add_option("--out", out, "assembled JSONL output");

  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "per-domain document counts and lengths");
  stats->add_option("--input", input, "segment corpus or assembled JSONL")->required();
  stats->add_option("--cap", cap, "whitespace-token cap");
  stats->add_flag("--json", stats_json, "print JSON");

  TranslateArgs t;
  auto* translate = app.add_subcommand("translate", "translate an assembled corpus");
  translate->add_option("--corpus,--in", t.corpus, "assembled JSONL or segment corpus")->required();
  translate->add_option("--run-dir,--out", t.run_dir, "run directory")->required();
  translate->add_option("--cap", t.cap, "cap when assembling a segment corpus");
  translate->add_option("--mode", t.mode, "sbys, zero-shot, zero-shot-seg, zero-shot-seg-ctx, maps");
  translate->add_option("--stages", t.stages, "comma list of research,draft,refine,proofread");
  translate->add_flag("--extract", t.extract, "structure research/draft output");
  translate->add_option("--selector", t.selector, "MAPS selector metric");
  translate->add_option("--selector-mode", t.selector_mode, "qe or reference");
  translate->add_option("--demos", t.demos, "MAPS demonstrations JSON");
  translate->add_option("--limit", t.limit, "translate only the first N documents");

  std::string run_dir, corpus;
  auto* extract = app.add_subcommand("extract-artifacts", "structure a finished run's research");
  extract->add_option("--run-dir", run_dir, "run directory")->required();
  extract->add_option("--corpus", corpus, "assembled JSONL");

  std::string metric = "chrf";
  std::optional<std::string> system;
  auto* score = app.add_subcommand("score", "score a run's final translations");
  score->add_option("--run-dir", run_dir, "run directory")->required();
  score->add_option("--corpus", corpus, "assembled JSONL with references")->required();
  score->add_option("--metric", metric, "chrf, chrf-pseudo or a plugin config");
  score->add_option("--system", system, "system name (default: run id)");

  std::string run_a, run_b, alternative = "two-sided";
  std::optional<std::string> orientation, sig_out;
  std::size_t resamples = kDefaultResamples;
  auto* sigtest = app.add_subcommand("sigtest", "paired permutation test between two runs");
  sigtest->add_option("--a", run_a, "run directory A")->required();
  sigtest->add_option("--b", run_b, "run directory B")->required();
  sigtest->add_option("--metric", metric, "metric name");
  sigtest->add_option("--alternative", alternative, "two-sided, a-better, b-better");
  sigtest->add_option("--orientation", orientation, "higher_better or lower_better");
  sigtest->add_option("--resamples", resamples, "Monte Carlo resamples");
  sigtest->add_option("--out", sig_out, "also write the JSON here");

  std::vector<std::string> runs;
  std::optional<std::string> sigtests, report_out;
  auto* report = app.add_subcommand("report", "render report.md from run directories");
  report->add_option("--runs", runs, "run directories")->required();
  report->add_option("--metric", metric, "metric name");
  report->add_option("--sigtests", sigtests, "directory of sigtest JSON files");
  report->add_option("--out", report_out, "output directory (default: first run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*assemble) return cmd_assemble(g, input, format, cap, out);
    if (*stats) return cmd_stats(g, input, cap, stats_json);
    if (*translate) return cmd_translate(g, t);
    if (*extract) return cmd_extract(g, run_dir, corpus);
    if (*score) return cmd_score(g, run_dir, corpus, metric, system);
    if (*sigtest) {
      return cmd_sigtest(g, run_a, run_b, metric, alternative, orientation, resamples, sig_out);
    }
    if (*report) return cmd_report(g, runs, metric, sigtests, report_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace sbys
