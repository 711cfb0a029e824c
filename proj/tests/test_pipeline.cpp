#include <doctest.h>

#include "helpers.hpp"
#include "sbys/batch.hpp"
#include "sbys/error.hpp"

using namespace sbys;
using testing::Fixture;
using testing::make_doc;
using V = std::vector<std::string>;

TEST_CASE("stage sets") {
  CHECK(StageSet::parse("all").to_string() == "research,draft,refine,proofread");
  CHECK(StageSet::parse("none").none());
  CHECK(StageSet::parse("draft,refine") == StageSet{false, true, true, false});
  CHECK_THROWS_AS(StageSet::parse("draft,polish"), UsageError);
  CHECK(!StageSet{true, false, false, false}.valid());
  CHECK(!StageSet{false, true, false, true}.valid());
  CHECK(ablation_configurations().size() == 7);
  for (const auto& s : ablation_configurations()) CHECK(s.valid());
}

TEST_CASE("template sequences for the seven configurations") {
  const std::vector<V> expected = {
      {"zero_shot"},
      {"drafting"},
      {"zero_shot", "refinement"},
      {"drafting", "refinement"},
      {"research", "drafting"},
      {"research", "drafting", "refinement"},
      {"research", "drafting", "refinement", "proofreading"},
  };
  const auto& configs = ablation_configurations();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    Fixture f;
    const auto out = run_step_by_step(make_doc(), configs[i], f.ctx);
    CHECK_MESSAGE(rendered_template_sequence(out) == expected[i], configs[i].to_string());
    V sent;
    for (const auto& r : f.mock.requests()) sent.push_back(r.last_template);
    CHECK(sent == expected[i]);
  }
}

TEST_CASE("full pipeline: one 6-turn conversation and a fresh 2-turn proofreading one") {
  Fixture f;
  const auto out = run_step_by_step(make_doc(), StageSet::parse("all"), f.ctx);
  REQUIRE(out.conversations.size() == 2);
  const auto& main = out.conversations[0];
  const auto& proof = out.conversations[1];
  CHECK(main.size() == 6);
  CHECK(proof.size() == 2);
  CHECK(proof.created_for.stage == "proofread");
  for (const auto& p : proof.messages)
    for (const auto& m : main.messages) CHECK(p.content != m.content);
  // The proofreading request carried no history.
  CHECK(f.mock.requests().back().messages.size() == 1);
  CHECK(proof.messages[0].content.find("drafting translation") != std::string::npos);
  CHECK(proof.messages[0].content.find("refinement translation") != std::string::npos);
  CHECK(out.final == "proofreading translation");
  CHECK(out.draft == std::optional<std::string>("drafting translation"));
  CHECK(out.research_response == std::optional<std::string>("Idiom: none"));
}

TEST_CASE("draft without research carries the context header") {
  Fixture f;
  run_step_by_step(make_doc(), StageSet::parse("draft"), f.ctx);
  const auto requests = f.mock.requests();
  const auto& first = requests.front().messages.front().content;
  CHECK(first.starts_with("You will be asked to translate a piece of text form English into German"));
  CHECK(first.find("Now, let's move on to the drafting stage.") != std::string::npos);
}

TEST_CASE("refinement without a draft continues the zero-shot exchange") {
  Fixture f;
  const auto out = run_step_by_step(make_doc(), StageSet::parse("refine"), f.ctx);
  CHECK(out.conversations.front().size() == 4);
  CHECK(out.zero_shot == std::optional<std::string>("zero_shot translation"));
  CHECK(out.final == "refinement translation");
}

TEST_CASE("blank refinement or proofreading falls back to the previous text") {
  Fixture f;
  f.mock.set_fallback([](const Conversation& c) -> std::string {
    const auto& tag = c.messages.back().template_tag;
    if (tag == "refinement") return "   ";
    if (tag == "proofreading") return "";
    return testing::tagged_reply(c);
  });
  const auto out = run_step_by_step(make_doc(), StageSet::parse("all"), f.ctx);
  CHECK(out.final == "drafting translation");
  CHECK(out.flags == V{"refine_fallback", "proofread_fallback"});
}

TEST_CASE("backend failures become stage failures") {
  Fixture f;
  f.mock.set_fallback([](const Conversation& c) -> std::string {
    if (c.messages.back().template_tag == "refinement") throw BackendRefusal("filtered");
    return testing::tagged_reply(c);
  });
  try {
    run_step_by_step(make_doc(), StageSet::parse("all"), f.ctx);
    FAIL("expected StageFailure");
  } catch (const StageFailure& e) {
    CHECK(e.stage() == "refine");
    CHECK(e.kind() == "BackendRefusal");
  }
  Fixture g;
  g.mock.set_fallback([](const Conversation&) { return std::string(); });
  CHECK_THROWS_AS(run_step_by_step(make_doc(), StageSet::parse("draft"), g.ctx), StageFailure);
  CHECK_THROWS_AS(run_step_by_step(make_doc(), StageSet{true, false, false, false}, g.ctx),
                  PreconditionError);
}

TEST_CASE("artifact parsing") {
  SUBCASE("slash alternatives keep the first") {
    const auto a = parse_artifacts(
        R"({"idiomatic_expressions":[{"source_phrase":"break a leg","description":"good luck",
            "translation":["Hals- und Beinbruch","toi toi toi"],"literal_translation":null}],
            "draft_translation":"Viel Glück / Alles Gute"})");
    CHECK(a.draft_translation == "Viel Glück");
    REQUIRE(a.idiomatic_expressions);
    CHECK(a.idiomatic_expressions->front().translations.size() == 2);
    CHECK(!a.idiomatic_expressions->front().literal_translation);
  }
  SUBCASE("explicit nulls") {
    const auto a = parse_artifacts(R"({"idiomatic_expressions":null,"draft_translation":"Hallo"})");
    CHECK(!a.idiomatic_expressions);
    CHECK(a.draft_translation == "Hallo");
  }
  SUBCASE("fenced output") {
    const auto a = parse_artifacts(
        "Here you go:\n```json\n{\"idiomatic_expressions\": [], \"draft_translation\": \"Hallo\"}\n```\n");
    CHECK(a.draft_translation == "Hallo");
    CHECK(a.idiomatic_expressions->empty());
  }
  SUBCASE("unspaced slashes survive") {
    const auto a = parse_artifacts(R"({"draft_translation":"und/oder https://a.de/x"})");
    CHECK(a.draft_translation == "und/oder https://a.de/x");
  }
  SUBCASE("malformed") {
    CHECK_THROWS_AS(parse_artifacts("no json here"), ParseFailure);
    CHECK_THROWS_AS(parse_artifacts(R"({"draft_translation": 3})"), ParseFailure);
    CHECK_THROWS_AS(parse_artifacts(R"({"draft_translation": "x", "idiomatic_expressions": 1})"),
                    ParseFailure);
  }
  CHECK(first_alternative(" a / b / c") == "a");
  CHECK(strip_code_fence("```\nx\n```") == "x");
}

TEST_CASE("extraction re-asks once, then records the failure") {
  Fixture f;
  f.mock.set_fallback([](const Conversation& c) -> std::string {
    const auto& tag = c.messages.back().template_tag;
    if (tag == "draft_json" || tag == "reask") return "I cannot produce JSON.";
    return testing::tagged_reply(c);
  });
  const auto out = run_step_by_step(make_doc(), StageSet::parse("all"), f.ctx, {true});
  CHECK(!out.artifacts);
  REQUIRE(out.extraction_error);
  CHECK(out.final == "proofreading translation");
  int draft_json = 0, reask = 0;
  for (const auto& r : f.mock.requests()) {
    draft_json += r.last_template == "draft_json";
    reask += r.last_template == "reask";
  }
  CHECK(draft_json == 1);
  CHECK(reask == 1);
  REQUIRE(out.conversations.size() == 3);
  CHECK(out.conversations[2].size() == 4);
}

TEST_CASE("extraction sees only research and draft responses") {
  Fixture f;
  const auto out = run_step_by_step(make_doc(), StageSet::parse("all"), f.ctx, {true});
  REQUIRE(out.artifacts);
  CHECK(out.artifacts->draft_translation == "Entwurf");
  const auto req = f.mock.requests().back();
  CHECK(req.last_template == "draft_json");
  REQUIRE(req.messages.size() == 1);
  const auto& text = req.messages[0].content;
  CHECK(text.find("[Pre-drafting research response]\nIdiom: none") != std::string::npos);
  CHECK(text.find("[Draft translation response]\ndrafting translation") != std::string::npos);
  CHECK(text.find("refinement translation") == std::string::npos);
}

TEST_CASE("batch keeps going past a failed document") {
  Fixture f;
  f.mock.set_fallback([](const Conversation& c) -> std::string {
    if (c.created_for.doc_id.starts_with("bad")) throw BackendRefusal("nope");
    return testing::tagged_reply(c);
  });
  std::vector<AssembledDocument> docs = {make_doc("a"), make_doc("bad"), make_doc("c")};
  const auto r = run_batch(docs, StageSet::parse("all"), f.ctx, {3, {}});
  CHECK(r.outputs.size() == 2);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].stage == "research");
  CHECK(r.partial_failure());
  CHECK(r.outputs[0].doc_id == docs[0].id);
  CHECK(r.outputs[1].doc_id == docs[2].id);
}

TEST_CASE("stage outputs json") {
  Fixture f;
  const auto out = run_step_by_step(make_doc(), StageSet::parse("all"), f.ctx, {true});
  nlohmann::json j = out;
  CHECK(j.at("mode") == "sbys");
  CHECK(!j.contains("conversations"));
  CHECK(!j.contains("timings_ms"));
  const auto back = j.get<StageOutputs>();
  CHECK(back.final == out.final);
  CHECK(back.stage_set == out.stage_set);
  CHECK(back.artifacts->draft_translation == "Entwurf");
}
