#include <doctest.h>

#include "helpers.hpp"
#include "sbys/error.hpp"

using namespace sbys;
using testing::Fixture;
using testing::make_doc;

namespace {

MapsDemonstrations demos() {
  return MapsDemonstrations::from_json(
      {{"en-de", {{"keywords", "K demo"}, {"topic", "T demo"}, {"demonstration", "D demo"}}}});
}

// Reference-free toy selector that prefers longer hypotheses.
class LengthSelector : public MetricPlugin {
 public:
  explicit LengthSelector(Orientation o = Orientation::higher_better, double scale = 1.0)
      : MetricPlugin({"len", o, false, false, Transport::builtin, "", ""}), scale_(scale) {}

 protected:
  std::vector<double> score_impl(const std::vector<ScoreRequest>& requests) override {
    std::vector<double> out;
    for (const auto& r : requests) out.push_back(scale_ * static_cast<double>(r.hypothesis.size()));
    return out;
  }

 private:
  double scale_;
};

std::string maps_reply(const Conversation& c) {
  const auto& tag = c.messages.back().template_tag;
  const auto& text = c.messages.back().content;
  if (tag == "maps_candidate") {
    if (text.find("K out") != std::string::npos) return "kurz";
    if (text.find("T out") != std::string::npos) return "ziemlich lang";
    return "mittel";
  }
  if (tag == "maps_keywords") return "K out";
  if (tag == "maps_topic") return "T out";
  return "D out";
}

}  // namespace

TEST_CASE("language names") {
  LanguageNames names;
  CHECK(names.name("de") == "German");
  CHECK(names.name("xx") == "xx");
  names.set("xx", "Example");
  CHECK(names.name("xx") == "Example");
}

TEST_CASE("zero-shot over the document") {
  Fixture f;
  const auto doc = make_doc();
  const auto r = zero_shot_exchange(doc, f.ctx);
  CHECK(r.translation == "zero_shot translation");
  CHECK(r.conversation.size() == 2);
  CHECK(r.conversation.messages[0].content.find("English: " + doc.source_text) != std::string::npos);
  f.mock.set_fallback([](const Conversation&) { return std::string(" \n"); });
  CHECK_THROWS_AS(zero_shot_document(doc, f.ctx), EmptyTranslation);
}

TEST_CASE("segment-level baselines") {
  Fixture f;
  const auto doc = make_doc("d", {"A.", "B.", "C."});
  const auto plain = segment_level_document(doc, f.ctx, false);
  CHECK(plain.per_segment.size() == 3);
  CHECK(plain.document_translation ==
        "zero_shot translation\nzero_shot translation\nzero_shot translation");
  CHECK(f.mock.call_count() == 3);

  Fixture g;
  const auto ctx = segment_level_document(doc, g.ctx, true);
  CHECK(ctx.per_segment.size() == 3);
  for (const auto& r : g.mock.requests()) {
    CHECK(r.last_template == "zero_shot_in_context");
    CHECK(r.messages[0].content.find("Context: A.\nB.\nC.") != std::string::npos);
  }
  CHECK(g.mock.requests()[1].created_for.stage == "zero_shot_in_context#1");

  CHECK_THROWS_AS(concat_segment_translations({"x"}, doc), LengthMismatch);
  CHECK_THROWS_AS(zero_shot_segment(Segment{}, g.ctx, true, nullptr), PreconditionError);
}

TEST_CASE("MAPS: six generations, three selector calls, best candidate chosen") {
  Fixture f;
  f.mock.set_fallback(maps_reply);
  LengthSelector selector;
  const auto set = maps_translate(make_doc(), f.ctx, selector, demos());
  CHECK(f.mock.call_count() == 6);
  CHECK(selector.call_count() == 3);
  REQUIRE(set.candidates.size() == 3);
  CHECK(set.selected == 1);
  CHECK(set.translation() == "ziemlich lang");
  std::vector<std::string> tags;
  for (const auto& r : f.mock.requests()) tags.push_back(r.last_template);
  CHECK(tags == std::vector<std::string>{"maps_keywords", "maps_topic", "maps_demo",
                                         "maps_candidate", "maps_candidate", "maps_candidate"});
  CHECK(f.mock.requests()[3].messages[0].content.starts_with("K out"));

  Fixture g;
  g.mock.set_fallback(maps_reply);
  LengthSelector lower(Orientation::lower_better);
  CHECK(maps_translate(make_doc(), g.ctx, lower, demos()).translation() == "kurz");
}

TEST_CASE("MAPS selection is invariant to positive rescaling") {
  for (const double scale : {0.001, 1.0, 7.5, 1e6}) {
    Fixture f;
    f.mock.set_fallback(maps_reply);
    LengthSelector s(Orientation::higher_better, scale);
    CHECK(maps_translate(make_doc(), f.ctx, s, demos()).selected == 1);
  }
}

TEST_CASE("MAPS errors") {
  Fixture f;
  f.mock.set_fallback(maps_reply);
  LengthSelector selector;
  CHECK_THROWS_AS(maps_translate(make_doc(), f.ctx, selector, MapsDemonstrations{}),
                  UnsupportedLanguagePair);
  ChrfPlugin chrf;
  CHECK_THROWS_AS(maps_translate(make_doc(), f.ctx, chrf, demos(), SelectorMode::qe), SelectorError);
  const auto by_ref = maps_translate(make_doc(), f.ctx, chrf, demos(), SelectorMode::reference);
  CHECK(by_ref.mode == SelectorMode::reference);
  CHECK(by_ref.orientation == Orientation::higher_better);
}

TEST_CASE("candidate selection ties go to the lowest index") {
  CHECK(select_candidate({1.0, 1.0, 1.0}, Orientation::lower_better) == 0);
  CHECK(select_candidate({2.0, 1.0, 1.0}, Orientation::lower_better) == 1);
  CHECK(select_candidate({2.0, 3.0, 3.0}, Orientation::higher_better) == 1);
}
