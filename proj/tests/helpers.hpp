#pragma once

#include <string>
#include <vector>

#include "sbys/baselines.hpp"
#include "sbys/corpus.hpp"
#include "sbys/llm.hpp"
#include "sbys/pipeline.hpp"

namespace testing {

inline sbys::AssembledDocument make_doc(const std::string& doc_id = "d1",
                                        std::vector<std::string> segments = {"One sentence.",
                                                                             "Two sentence."},
                                        const std::string& domain = "news") {
  std::vector<sbys::Segment> segs;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    segs.push_back({doc_id, sbys::Domain::parse(domain), i, segments[i],
                    "ref " + segments[i], "en", "de"});
  }
  return sbys::assemble_documents(segs, 1000).front();
}

// Reply text per template tag; translation turns get "<tag> translation".
inline std::string tagged_reply(const sbys::Conversation& c) {
  const auto& tag = c.messages.back().template_tag;
  if (tag == "research") return "Idiom: none";
  if (tag == "draft_json" || tag == "reask") {
    return R"({"idiomatic_expressions": null, "draft_translation": "Entwurf"})";
  }
  return tag + " translation";
}

struct Fixture {
  sbys::TemplateRegistry templates = sbys::TemplateRegistry::builtin();
  sbys::MockBackend mock{"mock", tagged_reply};
  sbys::GenerationConfig generation = [] {
    sbys::GenerationConfig g;
    g.backoff = std::chrono::milliseconds(1);
    return g;
  }();
  sbys::TranslationContext ctx{templates, mock, generation, {}};
};

}  // namespace testing
