#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbys/error.hpp"
#include "sbys/prompts.hpp"

using namespace sbys;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("built-in bodies equal the appendix fixtures") {
  const auto reg = TemplateRegistry::builtin();
  const std::filesystem::path dir = SBYS_FIXTURES "/appendix";
  int compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto id = template_id_from_string(entry.path().stem().string());
    CHECK_MESSAGE(reg.get(id).body == strip_trailing_newline(slurp(entry.path())),
                  entry.path().filename().string());
    ++compared;
  }
  CHECK(compared == 7);
}

TEST_CASE("verbatim bodies keep the original typos") {
  const auto reg = TemplateRegistry::builtin();
  CHECK(reg.get(TemplateId::research).body.find("piece of text form") != std::string::npos);
  CHECK(reg.get(TemplateId::research).body.find("into  {{target_language}}") != std::string::npos);
  CHECK(reg.get(TemplateId::proofreading).body.find("For you reference") != std::string::npos);
  const auto revised = TemplateRegistry::builtin(PromptVariant::revised);
  CHECK(revised.get(TemplateId::research).body.find("text from") != std::string::npos);
  CHECK(revised.digest(TemplateId::research) != reg.digest(TemplateId::research));
  CHECK(revised.digest(TemplateId::drafting) == reg.digest(TemplateId::drafting));
}

TEST_CASE("placeholders per template") {
  const auto reg = TemplateRegistry::builtin();
  using S = std::set<std::string>;
  CHECK(reg.get(TemplateId::research).required_placeholders ==
        S{"source_language", "source_text", "target_language"});
  CHECK(reg.get(TemplateId::drafting).required_placeholders == S{"source_language", "source_text"});
  CHECK(reg.get(TemplateId::refinement).required_placeholders.empty());
  CHECK(reg.get(TemplateId::draft_json).required_placeholders.empty());
  CHECK(reg.get(TemplateId::proofreading).required_placeholders ==
        S{"draft_translation", "refined_translation", "source_text"});
  CHECK(reg.get(TemplateId::zero_shot_in_context).required_placeholders.count("document_context"));
}

TEST_CASE("substitution is single pass and strict") {
  CHECK(substitute("a {{x}} b", {{"x", "{{y}}"}, {"y", "no"}}) == "a {{y}} b");
  CHECK_THROWS_AS(substitute("{{x}} {{z}}", {{"x", "1"}}), MissingPlaceholder);
  try {
    substitute("{{missing}}", {});
  } catch (const MissingPlaceholder& e) {
    CHECK(e.name() == "missing");
  }
  // Unused bindings are fine.
  CHECK(substitute("plain", {{"x", "1"}}) == "plain");
}

TEST_CASE("rendering zero-shot") {
  const auto r = render(TemplateId::zero_shot, {{"source_language", "English"},
                                                {"target_language", "German"},
                                                {"source_text", "Hello."}});
  CHECK(r.template_id == TemplateId::zero_shot);
  CHECK(r.text.ends_with("English: Hello.\nGerman:"));
  CHECK(r.text.starts_with("You are asked to translate the text below into German."));
  CHECK(!r.bindings_digest.empty());
}

TEST_CASE("digests are content hashes") {
  CHECK(template_digest(TemplateId::drafting).size() == 64);
  CHECK(template_digest(TemplateId::drafting) == TemplateRegistry::builtin().digest(TemplateId::drafting));
  CHECK(TemplateRegistry::builtin().all_digests().size() == std::size(kAllTemplateIds));
}

TEST_CASE("unknown template id") {
  CHECK_THROWS_AS(template_id_from_string("nope"), UnknownTemplate);
  for (const auto id : kAllTemplateIds) CHECK(template_id_from_string(to_string(id)) == id);
}

TEST_CASE("override directory replaces single bodies") {
  const auto dir = std::filesystem::temp_directory_path() / "sbys_prompt_override";
  std::filesystem::create_directories(dir);
  { std::ofstream(dir / "refinement.txt") << "Refine please.\n"; }
  const auto reg = TemplateRegistry::with_overrides(dir);
  CHECK(reg.get(TemplateId::refinement).body == "Refine please.");
  CHECK(reg.get(TemplateId::drafting).body == TemplateRegistry::builtin().get(TemplateId::drafting).body);
  std::filesystem::remove_all(dir);
}

TEST_CASE("draft context header is the research opening") {
  const auto reg = TemplateRegistry::builtin();
  const auto h = reg.draft_context_header(
      {{"source_language", "English"}, {"target_language", "German"}, {"source_text", "Hi."}});
  CHECK(h.starts_with("You will be asked to translate a piece of text form English into German"));
  CHECK(h.ends_with("Context: Hi."));
}
