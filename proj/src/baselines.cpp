#include "sbys/baselines.hpp"

#include <cctype>
#include <fstream>

#include "sbys/error.hpp"

namespace sbys {

LanguageNames::LanguageNames()
    : names_{{"en", "English"},  {"zh", "Chinese"},   {"de", "German"},   {"ja", "Japanese"},
             {"uk", "Ukrainian"}, {"ru", "Russian"},  {"he", "Hebrew"},   {"cs", "Czech"},
             {"hi", "Hindi"},    {"is", "Icelandic"}, {"es", "Spanish"},  {"fr", "French"},
             {"it", "Italian"},  {"pt", "Portuguese"}, {"ko", "Korean"},  {"ar", "Arabic"},
             {"pl", "Polish"},   {"nl", "Dutch"},     {"tr", "Turkish"}, {"sv", "Swedish"}} {}

void LanguageNames::set(const std::string& tag, const std::string& name) {
  names_[tag] = name;
}

std::string LanguageNames::name(const std::string& tag) const {
  if (const auto it = names_.find(tag); it != names_.end()) return it->second;
  // Region subtags fall back to the base language: "zh_CN" / "zh-CN" -> "zh".
  const auto cut = tag.find_first_of("-_");
  if (cut != std::string::npos) {
    if (const auto it = names_.find(tag.substr(0, cut)); it != names_.end()) return it->second;
  }
  return tag;
}

Bindings document_bindings(const AssembledDocument& doc, const LanguageNames& languages) {
  return {{"source_language", languages.name(doc.source_lang)},
          {"target_language", languages.name(doc.target_lang)},
          {"source_text", doc.source_text}};
}

bool is_blank(std::string_view text) {
  for (const char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

namespace {

ChatMessage user_turn(const RenderedPrompt& prompt) {
  return {Role::user, prompt.text, std::string(to_string(prompt.template_id))};
}

// One-shot exchange; empty completions become EmptyTranslation(stage).
std::pair<std::string, Conversation> single_turn(const RenderedPrompt& prompt,
                                                 const TranslationContext& ctx,
                                                 Provenance provenance, bool translation) {
  Conversation conv{{}, ctx.backend.model_id(), std::move(provenance)};
  try {
    auto [text, next] = continue_conversation(conv, user_turn(prompt), ctx.generation, ctx.backend);
    if (translation && is_blank(text)) throw EmptyTranslation(next.created_for.stage);
    return {std::move(text), std::move(next)};
  } catch (const EmptyCompletion&) {
    if (translation) throw EmptyTranslation(conv.created_for.stage);
    throw;
  }
}

}  // namespace

ZeroShotResult zero_shot_exchange(const AssembledDocument& doc, const TranslationContext& ctx) {
  const auto prompt =
      ctx.templates.render(TemplateId::zero_shot, document_bindings(doc, ctx.languages));
  auto [text, conv] = single_turn(prompt, ctx, {doc.id, "zero_shot"}, true);
  return {std::move(text), std::move(conv)};
}

std::string zero_shot_document(const AssembledDocument& doc, const TranslationContext& ctx) {
  return zero_shot_exchange(doc, ctx).translation;
}

ZeroShotResult zero_shot_segment(const Segment& segment, const TranslationContext& ctx,
                                 bool with_context, const AssembledDocument* document) {
  if (with_context && !document) {
    throw PreconditionError("in-context segment translation needs the enclosing document");
  }
  Bindings bindings{{"source_language", ctx.languages.name(segment.source_lang)},
                    {"target_language", ctx.languages.name(segment.target_lang)},
                    {"source_text", segment.source_text}};
  if (with_context) bindings["document_context"] = document->source_text;
  const auto id = with_context ? TemplateId::zero_shot_in_context : TemplateId::zero_shot;
  const auto prompt = ctx.templates.render(id, bindings);
  const auto doc_id = document ? document->id : segment.doc_id;
  auto [text, conv] = single_turn(
      prompt, ctx, {doc_id, std::string(to_string(id)) + "#" + std::to_string(segment.index)},
      true);
  return {std::move(text), std::move(conv)};
}

std::string concat_segment_translations(const std::vector<std::string>& per_segment,
                                        const AssembledDocument& doc, std::string_view joiner) {
  if (per_segment.size() != doc.segment_span.size()) {
    throw LengthMismatch("document '" + doc.id + "' spans " +
                         std::to_string(doc.segment_span.size()) + " segments but " +
                         std::to_string(per_segment.size()) + " translations were given");
  }
  std::string out;
  for (std::size_t i = 0; i < per_segment.size(); ++i) {
    if (i) out.append(joiner);
    out.append(per_segment[i]);
  }
  return out;
}

SegmentLevelResult segment_level_document(const AssembledDocument& doc,
                                          const TranslationContext& ctx, bool with_context) {
  if (doc.segment_sources.size() != doc.segment_span.size()) {
    throw LengthMismatch("document '" + doc.id + "' carries " +
                         std::to_string(doc.segment_sources.size()) +
                         " segment texts for a span of " +
                         std::to_string(doc.segment_span.size()));
  }
  SegmentLevelResult result;
  for (std::size_t i = 0; i < doc.segment_sources.size(); ++i) {
    Segment seg{doc.doc_id,
                doc.domain,
                doc.segment_span.first + i,
                doc.segment_sources[i],
                i < doc.segment_references.size() ? doc.segment_references[i] : std::nullopt,
                doc.source_lang,
                doc.target_lang};
    auto r = zero_shot_segment(seg, ctx, with_context, &doc);
    result.per_segment.push_back(std::move(r.translation));
    result.conversations.push_back(std::move(r.conversation));
  }
  result.document_translation = concat_segment_translations(result.per_segment, doc);
  return result;
}

// ------------------------------------------------------------------ MAPS

std::string_view to_string(KnowledgeKind kind) {
  switch (kind) {
    case KnowledgeKind::keywords: return "keywords";
    case KnowledgeKind::topic: return "topic";
    case KnowledgeKind::demonstration: return "demonstration";
  }
  return "unknown";
}

std::string_view to_string(SelectorMode mode) {
  return mode == SelectorMode::qe ? "qe" : "reference";
}

MapsDemonstrations MapsDemonstrations::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("maps demonstrations: expected an object keyed by pair");
  MapsDemonstrations demos;
  for (const auto& [pair, kinds] : j.items()) {
    for (const auto kind : kKnowledgeKinds) {
      const auto key = std::string(to_string(kind));
      if (!kinds.is_object() || !kinds.contains(key) || !kinds.at(key).is_string()) {
        throw ConfigError("maps demonstrations." + pair + "." + key + ": required string");
      }
      demos.set(pair, kind, kinds.at(key).get<std::string>());
    }
  }
  return demos;
}

MapsDemonstrations MapsDemonstrations::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open MAPS demonstrations '" + path.string() + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void MapsDemonstrations::set(const std::string& pair, KnowledgeKind kind, std::string text) {
  by_pair_[pair][kind] = std::move(text);
}

bool MapsDemonstrations::supports(const std::string& pair) const {
  const auto it = by_pair_.find(pair);
  return it != by_pair_.end() && it->second.size() == std::size(kKnowledgeKinds);
}

const std::string& MapsDemonstrations::get(const std::string& pair, KnowledgeKind kind) const {
  if (!supports(pair)) {
    throw UnsupportedLanguagePair("no MAPS demonstrations for language pair '" + pair + "'");
  }
  return by_pair_.at(pair).at(kind);
}

std::size_t select_candidate(const std::vector<double>& scores, Orientation orientation) {
  return argbest(scores, orientation);
}

CandidateSet maps_translate(const AssembledDocument& doc, const TranslationContext& ctx,
                            MetricPlugin& selector, const MapsDemonstrations& demos,
                            SelectorMode mode) {
  const auto pair = doc.source_lang + "-" + doc.target_lang;
  if (!demos.supports(pair)) {
    throw UnsupportedLanguagePair("MAPS has no demonstrations for '" + pair + "'");
  }
  if (mode == SelectorMode::qe && !selector.usable_as_selector()) {
    throw SelectorError("metric '" + selector.spec().name +
                        "' needs a reference and cannot select in QE mode");
  }
  if (mode == SelectorMode::reference && !doc.reference_text) {
    throw SelectorError("reference-mode selection needs a reference for '" + doc.id + "'");
  }

  CandidateSet set;
  set.doc_id = doc.id;
  set.orientation = selector.spec().orientation;
  set.selector = selector.spec().name;
  set.mode = mode;

  const auto base = document_bindings(doc, ctx.languages);
  constexpr TemplateId knowledge_template[] = {TemplateId::maps_keywords, TemplateId::maps_topic,
                                               TemplateId::maps_demo};
  std::vector<std::string> knowledge;
  for (std::size_t k = 0; k < std::size(kKnowledgeKinds); ++k) {
    auto bindings = base;
    bindings["demonstrations"] = demos.get(pair, kKnowledgeKinds[k]);
    const auto prompt = ctx.templates.render(knowledge_template[k], bindings);
    auto [text, conv] = single_turn(
        prompt, ctx, {doc.id, "maps_" + std::string(to_string(kKnowledgeKinds[k]))}, false);
    knowledge.push_back(std::move(text));
    set.conversations.push_back(std::move(conv));
  }
  for (std::size_t k = 0; k < std::size(kKnowledgeKinds); ++k) {
    auto bindings = base;
    bindings["knowledge"] = knowledge[k];
    const auto prompt = ctx.templates.render(TemplateId::maps_candidate, bindings);
    auto [text, conv] = single_turn(
        prompt, ctx, {doc.id, "maps_candidate_" + std::string(to_string(kKnowledgeKinds[k]))},
        true);
    set.candidates.push_back({kKnowledgeKinds[k], knowledge[k], std::move(text)});
    set.conversations.push_back(std::move(conv));
  }
  for (std::size_t k = 0; k < set.candidates.size(); ++k) {
    ScoreRequest request{doc.id + "#" + std::string(to_string(set.candidates[k].kind)),
                         set.candidates[k].translation, doc.source_text, std::nullopt};
    if (mode == SelectorMode::reference) request.reference = doc.reference_text;
    try {
      const auto scores = selector.score({request});
      if (scores.size() != 1) throw PluginProtocolError("expected exactly one score");
      set.selector_scores.push_back(scores.front());
    } catch (const Error& e) {
      throw SelectorError("selector '" + set.selector + "' failed on '" + request.id +
                          "': " + e.what());
    }
  }
  set.selected = select_candidate(set.selector_scores, set.orientation);
  return set;
}

}  // namespace sbys
