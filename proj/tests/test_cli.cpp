#include <doctest.h>

#include "cli_util.hpp"
#include "sbys/corpus.hpp"
#include "sbys/pipeline.hpp"
#include "sbys/run_io.hpp"

using namespace sbys;
using testing::fresh_dir;
using testing::run_cli;

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("translate --corpus x.jsonl") == 2);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("assemble on the fixture corpus") {
  const auto dir = fresh_dir("sbys_cli_assemble");
  const auto out = dir / "a.jsonl";
  REQUIRE(run_cli("assemble --input " SBYS_FIXTURES "/corpus_small.tsv --out " + out.string()) == 0);
  const auto docs = read_assembled_jsonl(out);
  CHECK(docs.size() == 8);
  REQUIRE(run_cli("assemble --cap 1000 --input " SBYS_FIXTURES "/corpus_small.tsv --out " +
               out.string()) == 0);
  CHECK(read_assembled_jsonl(out).size() == 5);
  CHECK(run_cli("assemble --input /nonexistent.tsv --out " + out.string()) == 1);
}

TEST_CASE("mock pipeline end to end") {
  const auto root = fresh_dir("sbys_cli_e2e");
  REQUIRE(testing::full_flow(root, "--backend mock --cache " + (root / "cache.jsonl").string()));
  const auto run = root / "runs" / "full";
  for (const char* f : {"manifest.json", "outputs.jsonl", "conversations.jsonl", "timings.jsonl",
                        "errors.jsonl", "scores.csv", "report.md", "sigtests/full_vs_zero.json"}) {
    CHECK_MESSAGE(std::filesystem::exists(run / f), f);
  }
  const auto manifest = read_manifest(run);
  CHECK(manifest.reportable());
  CHECK(manifest.stage_set == "research,draft,refine,proofread");
  CHECK(read_scores_csv(run / "scores.csv").size() == 8);
  const auto report = read_text(run / "report.md");
  CHECK(report.find("## Stage ablation") != std::string::npos);
  CHECK(std::filesystem::exists(run / "domain_deltas.csv"));

  // Every document's main conversation has six turns.
  for (const auto& j : read_jsonl(run / "conversations.jsonl")) {
    if (j.at("stage") == "main") CHECK(j.at("messages").size() == 6);
    if (j.at("stage") == "proofread") CHECK(j.at("messages").size() == 2);
  }
}

TEST_CASE("other modes and artifact extraction") {
  const auto root = fresh_dir("sbys_cli_modes");
  const auto a = (root / "a.jsonl").string();
  REQUIRE(run_cli("assemble --input " SBYS_FIXTURES "/corpus_small.tsv --out " + a) == 0);
  for (const char* mode : {"zero-shot", "zero-shot-seg", "zero-shot-seg-ctx"}) {
    const auto dir = (root / mode).string();
    CHECK_MESSAGE(run_cli(std::string("translate --mode ") + mode + " --corpus " + a +
                       " --run-dir " + dir) == 0,
                  mode);
    CHECK(read_final_translations(dir).size() == 8);
  }
  // MAPS without demonstrations for en-de: every document fails -> exit 1.
  CHECK(run_cli("translate --mode maps --corpus " + a + " --run-dir " + (root / "maps").string()) == 1);
  CHECK(read_jsonl(root / "maps" / "errors.jsonl").size() == 8);

  write_text(root / "demos.json",
             R"({"en-de": {"keywords": "k", "topic": "t", "demonstration": "d"}})");
  CHECK(run_cli("translate --mode maps --demos " + (root / "demos.json").string() + " --corpus " + a +
             " --run-dir " + (root / "maps2").string()) == 0);
  const auto out = read_jsonl(root / "maps2" / "outputs.jsonl");
  REQUIRE(out.size() == 8);
  CHECK(out[0].at("candidates").size() == 3);

  const auto sb = (root / "sbys").string();
  REQUIRE(run_cli("translate --stages research,draft --corpus " + a + " --run-dir " + sb) == 0);
  CHECK(run_cli("extract-artifacts --run-dir " + sb + " --corpus " + a) == 0);
  const auto arts = read_jsonl(root / "sbys" / "artifacts.jsonl");
  REQUIRE(arts.size() == 8);
  CHECK(arts[0].at("artifacts").at("draft_translation").is_string());

  CHECK(run_cli("translate --stages research --corpus " + a + " --run-dir " + sb) == 2);
  CHECK(run_cli("stats --input " + a) == 0);
  CHECK(run_cli("stats --input " SBYS_FIXTURES "/corpus_small.tsv --json") == 0);
}

TEST_CASE("replay with a cold cache fails per document, not the batch") {
  const auto root = fresh_dir("sbys_cli_replay_miss");
  const auto a = (root / "a.jsonl").string();
  REQUIRE(run_cli("assemble --input " SBYS_FIXTURES "/corpus_small.tsv --out " + a) == 0);
  CHECK(run_cli("--backend replay --cache " + (root / "empty.jsonl").string() +
             " translate --corpus " + a + " --run-dir " + (root / "r").string()) == 1);
  const auto errors = read_jsonl(root / "r" / "errors.jsonl");
  REQUIRE(errors.size() == 8);
  CHECK(errors[0].at("kind") == "ReplayMiss");
  CHECK(run_cli("--backend replay translate --corpus " + a + " --run-dir " + (root / "r").string()) ==
        1);
}

TEST_CASE("bad config exits with an error naming the key") {
  const auto root = fresh_dir("sbys_cli_config");
  write_text(root / "c.json", R"({"backend": {"kind": "teleport"}})");
  CHECK(run_cli("--config " + (root / "c.json").string() + " stats --input " SBYS_FIXTURES
             "/corpus_small.tsv") == 1);
}

TEST_CASE("translate takes a segment corpus with --in/--out/--cap") {
  const auto root = fresh_dir("sbys_cli_in_out");
  const auto run = root / "r";
  REQUIRE(run_cli("--backend mock translate --cap 1000 --in " SBYS_FIXTURES "/corpus_small.tsv --out " +
                  run.string()) == 0);
  CHECK(read_manifest(run).reportable());
  CHECK(read_jsonl(run / "outputs.jsonl").size() == 5);
}
