#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sbys/baselines.hpp"
#include "sbys/corpus.hpp"
#include "sbys/llm.hpp"

namespace sbys {

struct StageSet {
  bool research = false;
  bool draft = false;
  bool refine = false;
  bool proofread = false;

  // research needs draft; proofread needs refine.
  bool valid() const { return (!research || draft) && (!proofread || refine); }
  bool none() const { return !research && !draft && !refine && !proofread; }

  // "research,draft,refine,proofread"; "none" when empty.
  std::string to_string() const;
  // Accepts a comma list of stage names, "all" or "none". Throws UsageError.
  static StageSet parse(std::string_view text);

  friend bool operator==(const StageSet&, const StageSet&) = default;
};

// The seven ablation configurations, in table order: zero-shot, draft,
// refine, draft+refine, research+draft, research+draft+refine, all four.
const std::vector<StageSet>& ablation_configurations();

struct IdiomEntry {
  std::string source_phrase;
  std::string description;
  std::vector<std::string> translations;
  std::optional<std::string> literal_translation;
};

struct ResearchArtifacts {
  std::optional<std::vector<IdiomEntry>> idiomatic_expressions;
  std::string draft_translation;
};

// Everything one document produced. `final` follows proofread > refine >
// draft > zero_shot precedence.
struct StageOutputs {
  std::string doc_id;
  StageSet stage_set;
  std::optional<std::string> research_response;
  std::optional<ResearchArtifacts> artifacts;
  std::optional<std::string> extraction_error;
  std::optional<std::string> zero_shot;
  std::optional<std::string> draft;
  std::optional<std::string> refined;
  std::string final;
  std::vector<std::string> flags;  // e.g. "refine_fallback"
  std::vector<Conversation> conversations;
  std::map<std::string, double> timings_ms;
};

struct PipelineOptions {
  // Issue the secondary structuring call after the research/draft stages.
  bool extract_artifacts = false;
};

// Runs the enabled stages in order. Research, draft and refine share one
// conversation; proofreading opens a new one. Throws PreconditionError for
// an invalid StageSet and StageFailure (doc_id, stage) for backend errors.
StageOutputs run_step_by_step(const AssembledDocument& doc, const StageSet& stages,
                              const TranslationContext& ctx, const PipelineOptions& options = {});

// Template ids of the user turns, in the order they were sent.
std::vector<std::string> rendered_template_sequence(const StageOutputs& outputs);

// Drops everything from the first "/" on.
std::string first_alternative(std::string_view text);

// Line by line, keeps the first of " / "-separated alternatives. Unspaced
// slashes (URLs, "and/or") are left alone.
std::string first_alternatives_by_line(std::string_view text);

// Removes a surrounding ``` fence (with optional language tag) if present.
std::string strip_code_fence(std::string_view text);

// Parses the structuring call's reply. Throws ParseFailure.
ResearchArtifacts parse_artifacts(std::string_view raw);

// Secondary structuring call over the assistant turns of the research/draft
// conversation. A reply that does not parse triggers one re-ask; a second
// failure throws ParseFailure. `archive`, when given, receives the
// extraction conversation.
ResearchArtifacts extract_artifacts(const Conversation& research_draft_conversation,
                                    const TranslationContext& ctx,
                                    Conversation* archive = nullptr);

inline constexpr std::string_view kReaskPrompt =
    "Your previous reply could not be parsed as a JSON object. Reply with only the JSON "
    "object described above.";

void to_json(nlohmann::json& j, const IdiomEntry& e);
void to_json(nlohmann::json& j, const ResearchArtifacts& a);
void from_json(const nlohmann::json& j, ResearchArtifacts& a);
// Conversations and timings are written to their own files.
void to_json(nlohmann::json& j, const StageOutputs& o);
void from_json(const nlohmann::json& j, StageOutputs& o);

}  // namespace sbys
