#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbys/corpus.hpp"
#include "sbys/llm.hpp"
#include "sbys/metrics.hpp"
#include "sbys/prompts.hpp"

namespace sbys {

// Language tag -> English name used in prompts ("zh" -> "Chinese").
class LanguageNames {
 public:
  LanguageNames();
  void set(const std::string& tag, const std::string& name);
  // Unknown tags are returned unchanged.
  std::string name(const std::string& tag) const;

 private:
  std::map<std::string, std::string> names_;
};

// Everything a translation routine needs besides the document.
struct TranslationContext {
  const TemplateRegistry& templates;
  ChatBackend& backend;
  GenerationConfig generation;
  LanguageNames languages;
};

// source_language, target_language, source_text for `doc`.
Bindings document_bindings(const AssembledDocument& doc, const LanguageNames& languages);

// True if `text` is empty or whitespace only.
bool is_blank(std::string_view text);

struct ZeroShotResult {
  std::string translation;
  Conversation conversation;  // the 2-turn exchange
};

// Single-turn zero-shot over the whole document. Throws EmptyTranslation.
ZeroShotResult zero_shot_exchange(const AssembledDocument& doc, const TranslationContext& ctx);
std::string zero_shot_document(const AssembledDocument& doc, const TranslationContext& ctx);

// Zero-shot for one segment; with_context renders the in-context template
// with `document`'s source as context. Throws PreconditionError when
// with_context is set without a document.
ZeroShotResult zero_shot_segment(const Segment& segment, const TranslationContext& ctx,
                                 bool with_context,
                                 const AssembledDocument* document = nullptr);

// Joins per-segment translations with `joiner`. Throws LengthMismatch when
// the count differs from the document's segment span.
std::string concat_segment_translations(const std::vector<std::string>& per_segment,
                                        const AssembledDocument& doc,
                                        std::string_view joiner = kDefaultJoiner);

struct SegmentLevelResult {
  std::vector<std::string> per_segment;
  std::string document_translation;
  std::vector<Conversation> conversations;
};

// Translates every segment of `doc` independently and concatenates.
SegmentLevelResult segment_level_document(const AssembledDocument& doc,
                                          const TranslationContext& ctx, bool with_context);

// ------------------------------------------------------------------ MAPS

enum class KnowledgeKind { keywords, topic, demonstration };
std::string_view to_string(KnowledgeKind kind);
inline constexpr KnowledgeKind kKnowledgeKinds[] = {
    KnowledgeKind::keywords, KnowledgeKind::topic, KnowledgeKind::demonstration};

// Few-shot demonstrations per language pair ("en-de") and knowledge kind.
// File format: {"en-de": {"keywords": "...", "topic": "...", "demonstration": "..."}}
class MapsDemonstrations {
 public:
  static MapsDemonstrations load(const std::filesystem::path& path);
  static MapsDemonstrations from_json(const nlohmann::json& j);
  void set(const std::string& pair, KnowledgeKind kind, std::string text);
  bool supports(const std::string& pair) const;
  const std::string& get(const std::string& pair, KnowledgeKind kind) const;

 private:
  std::map<std::string, std::map<KnowledgeKind, std::string>> by_pair_;
};

enum class SelectorMode { qe, reference };
std::string_view to_string(SelectorMode mode);

struct Candidate {
  KnowledgeKind kind;
  std::string knowledge;
  std::string translation;
};

struct CandidateSet {
  std::string doc_id;
  std::vector<Candidate> candidates;
  std::size_t selected = 0;
  std::vector<double> selector_scores;
  Orientation orientation = Orientation::lower_better;
  std::string selector;
  SelectorMode mode = SelectorMode::qe;
  std::vector<Conversation> conversations;

  const std::string& translation() const { return candidates.at(selected).translation; }
};

// Index of the best score; ties resolve to the lowest index.
std::size_t select_candidate(const std::vector<double>& scores, Orientation orientation);

// Three knowledge elicitations, three conditioned candidates, one selector
// call per candidate. Throws UnsupportedLanguagePair when no demonstrations
// exist for the document's pair, SelectorError when the selector fails or
// cannot run in `mode`.
CandidateSet maps_translate(const AssembledDocument& doc, const TranslationContext& ctx,
                            MetricPlugin& selector, const MapsDemonstrations& demos,
                            SelectorMode mode = SelectorMode::qe);

}  // namespace sbys
