#include "sbys/pipeline.hpp"

#include <chrono>

#include "sbys/error.hpp"

namespace sbys {

std::string StageSet::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(research, "research");
  add(draft, "draft");
  add(refine, "refine");
  add(proofread, "proofread");
  return out.empty() ? "none" : out;
}

StageSet StageSet::parse(std::string_view text) {
  StageSet s;
  if (text == "none" || text.empty()) return s;
  if (text == "all") return {true, true, true, true};
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const auto name = text.substr(pos, comma - pos);
    if (name == "research") {
      s.research = true;
    } else if (name == "draft") {
      s.draft = true;
    } else if (name == "refine") {
      s.refine = true;
    } else if (name == "proofread") {
      s.proofread = true;
    } else {
      throw UsageError("unknown stage '" + std::string(name) +
                       "' (expected research, draft, refine, proofread)");
    }
    pos = comma + 1;
  }
  return s;
}

const std::vector<StageSet>& ablation_configurations() {
  static const std::vector<StageSet> rows = {
      {false, false, false, false}, {false, true, false, false}, {false, false, true, false},
      {false, true, true, false},   {true, true, false, false},  {true, true, true, false},
      {true, true, true, true},
  };
  return rows;
}

std::string first_alternative(std::string_view text) {
  const auto slash = text.find('/');
  auto head = text.substr(0, slash);
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.back()))) {
    head.remove_suffix(1);
  }
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.front()))) {
    head.remove_prefix(1);
  }
  return std::string(head);
}

std::string first_alternatives_by_line(std::string_view text) {
  std::string out;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    const auto line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    out += line.find(" / ") == std::string_view::npos ? std::string(line)
                                                      : first_alternative(line);
    if (nl == std::string_view::npos) break;
    out += '\n';
    start = nl + 1;
  }
  return out;
}

std::string strip_code_fence(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return std::string(text);
  const auto body_start = text.find('\n', open);
  if (body_start == std::string_view::npos) return std::string(text);
  const auto close = text.find("```", body_start + 1);
  if (close == std::string_view::npos) return std::string(text.substr(body_start + 1));
  auto body = text.substr(body_start + 1, close - body_start - 1);
  if (body.ends_with('\n')) body.remove_suffix(1);
  return std::string(body);
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& j) {
  std::vector<std::string> out;
  if (j.is_null()) return out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
    return out;
  }
  if (!j.is_array()) throw ParseFailure("'translation' must be a list of strings", j.dump());
  for (const auto& item : j) {
    if (!item.is_string()) throw ParseFailure("'translation' must hold strings", j.dump());
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string optional_string_field(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseFailure(std::string("'") + key + "' must be a string", obj.dump());
  return it->get<std::string>();
}

}  // namespace

ResearchArtifacts parse_artifacts(std::string_view raw) {
  auto text = strip_code_fence(raw);
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ParseFailure("no JSON object found", std::string(raw));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.substr(open, close - open + 1));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseFailure(e.what(), std::string(raw));
  }
  ResearchArtifacts a;
  const auto draft = j.find("draft_translation");
  if (draft == j.end() || !draft->is_string()) {
    throw ParseFailure("'draft_translation' missing or not a string", std::string(raw));
  }
  a.draft_translation = first_alternatives_by_line(draft->get<std::string>());
  const auto idioms = j.find("idiomatic_expressions");
  if (idioms != j.end() && !idioms->is_null()) {
    if (!idioms->is_array()) {
      throw ParseFailure("'idiomatic_expressions' must be a list or null", std::string(raw));
    }
    std::vector<IdiomEntry> entries;
    for (const auto& item : *idioms) {
      if (!item.is_object()) throw ParseFailure("idiom entry is not an object", std::string(raw));
      IdiomEntry e;
      e.source_phrase = optional_string_field(item, "source_phrase");
      e.description = optional_string_field(item, "description");
      if (const auto t = item.find("translation"); t != item.end()) {
        e.translations = string_list(*t);
      }
      if (const auto lit = item.find("literal_translation"); lit != item.end() && !lit->is_null()) {
        if (!lit->is_string()) {
          throw ParseFailure("'literal_translation' must be a string or null", std::string(raw));
        }
        e.literal_translation = lit->get<std::string>();
      }
      entries.push_back(std::move(e));
    }
    a.idiomatic_expressions = std::move(entries);
  }
  return a;
}

ResearchArtifacts extract_artifacts(const Conversation& research_draft_conversation,
                                    const TranslationContext& ctx, Conversation* archive) {
  std::string labeled;
  const auto& msgs = research_draft_conversation.messages;
  for (std::size_t i = 1; i < msgs.size(); ++i) {
    if (msgs[i].role != Role::assistant) continue;
    const auto& tag = msgs[i - 1].template_tag;
    const char* label = tag == "research" ? "Pre-drafting research response"
                        : tag == "drafting" ? "Draft translation response"
                                            : "Response";
    labeled += std::string("[") + label + "]\n" + msgs[i].content + "\n\n";
  }
  if (labeled.empty()) {
    throw PreconditionError("artifact extraction needs at least one assistant response");
  }
  const auto prompt = ctx.templates.render(TemplateId::draft_json, {});
  Conversation conv{{}, ctx.backend.model_id(),
                    {research_draft_conversation.created_for.doc_id, "extract"}};
  auto [reply, next] = continue_conversation(
      conv, ChatMessage{Role::user, labeled + prompt.text, "draft_json"}, ctx.generation,
      ctx.backend);
  conv = std::move(next);
  if (archive) *archive = conv;
  try {
    return parse_artifacts(reply);
  } catch (const ParseFailure&) {
    auto [second, retried] = continue_conversation(
        conv, ChatMessage{Role::user, std::string(kReaskPrompt), "reask"}, ctx.generation,
        ctx.backend);
    if (archive) *archive = retried;
    return parse_artifacts(second);
  }
}

namespace {

using Clock = std::chrono::steady_clock;

ChatMessage user_turn(const RenderedPrompt& prompt) {
  return {Role::user, prompt.text, std::string(to_string(prompt.template_id))};
}

// Runs one conversational step, converting backend errors into StageFailure.
// Returns nullopt when the stage produced only whitespace.
std::optional<std::string> step(Conversation& conv, ChatMessage turn, const char* stage,
                                const std::string& doc_id, const TranslationContext& ctx,
                                std::map<std::string, double>& timings) {
  const auto started = Clock::now();
  try {
    auto [text, next] = continue_conversation(conv, std::move(turn), ctx.generation, ctx.backend);
    conv = std::move(next);
    timings[stage] = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
    if (is_blank(text)) return std::nullopt;
    return text;
  } catch (const EmptyCompletion&) {
    timings[stage] = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
    return std::nullopt;
  } catch (const StageFailure&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure(doc_id, stage, e);
  }
}

}  // namespace

StageOutputs run_step_by_step(const AssembledDocument& doc, const StageSet& stages,
                              const TranslationContext& ctx, const PipelineOptions& options) {
  if (!stages.valid()) {
    throw PreconditionError("invalid stage set '" + stages.to_string() +
                            "': research requires draft and proofread requires refine");
  }
  StageOutputs out;
  out.doc_id = doc.id;
  out.stage_set = stages;
  const auto bindings = document_bindings(doc, ctx.languages);
  const auto& tpl = ctx.templates;

  Conversation main{{}, ctx.backend.model_id(), {doc.id, "main"}};
  std::string current;

  if (stages.research) {
    const auto r = step(main, user_turn(tpl.render(TemplateId::research, bindings)), "research",
                        doc.id, ctx, out.timings_ms);
    if (!r) throw StageFailure(doc.id, "research", EmptyTranslation("research"));
    out.research_response = *r;
  }
  if (stages.draft) {
    auto prompt = tpl.render(TemplateId::drafting, bindings);
    if (!stages.research) {
      prompt.text = tpl.draft_context_header(bindings) + "\n\n" + prompt.text;
    }
    const auto d = step(main, user_turn(prompt), "draft", doc.id, ctx, out.timings_ms);
    if (!d) throw StageFailure(doc.id, "draft", EmptyTranslation("draft"));
    out.draft = *d;
    current = *d;
  } else {
    const auto z = step(main, user_turn(tpl.render(TemplateId::zero_shot, bindings)), "zero_shot",
                        doc.id, ctx, out.timings_ms);
    if (!z) throw StageFailure(doc.id, "zero_shot", EmptyTranslation("zero_shot"));
    out.zero_shot = *z;
    current = *z;
  }
  // Research/draft prefix, kept for extraction before refinement extends it.
  const Conversation research_draft = main;

  if (stages.refine) {
    const auto r = step(main, user_turn(tpl.render(TemplateId::refinement, bindings)), "refine",
                        doc.id, ctx, out.timings_ms);
    if (r) {
      current = *r;
    } else {
      out.flags.push_back("refine_fallback");
    }
    out.refined = current;
  }
  out.conversations.push_back(main);

  if (stages.proofread) {
    auto proof_bindings = bindings;
    proof_bindings["draft_translation"] = out.draft ? *out.draft : *out.zero_shot;
    proof_bindings["refined_translation"] = *out.refined;
    Conversation proof{{}, ctx.backend.model_id(), {doc.id, "proofread"}};
    const auto p = step(proof, user_turn(tpl.render(TemplateId::proofreading, proof_bindings)),
                        "proofread", doc.id, ctx, out.timings_ms);
    if (p) {
      current = *p;
    } else {
      out.flags.push_back("proofread_fallback");
    }
    out.conversations.push_back(std::move(proof));
  }
  out.final = current;

  if (options.extract_artifacts && (stages.research || stages.draft)) {
    Conversation archive;
    const auto started = Clock::now();
    try {
      out.artifacts = extract_artifacts(research_draft, ctx, &archive);
    } catch (const ParseFailure& e) {
      out.extraction_error = e.what();
    } catch (const Error& e) {
      throw StageFailure(doc.id, "extract", e);
    }
    out.timings_ms["extract"] =
        std::chrono::duration<double, std::milli>(Clock::now() - started).count();
    if (!archive.empty()) out.conversations.push_back(std::move(archive));
  }
  return out;
}

std::vector<std::string> rendered_template_sequence(const StageOutputs& outputs) {
  std::vector<std::string> ids;
  for (const auto& conv : outputs.conversations) {
    for (const auto& m : conv.messages) {
      if (m.role == Role::user) ids.push_back(m.template_tag);
    }
  }
  return ids;
}

void to_json(nlohmann::json& j, const IdiomEntry& e) {
  j = {{"source_phrase", e.source_phrase},
       {"description", e.description},
       {"translation", e.translations},
       {"literal_translation",
        e.literal_translation ? nlohmann::json(*e.literal_translation) : nullptr}};
}

void to_json(nlohmann::json& j, const ResearchArtifacts& a) {
  j = {{"idiomatic_expressions",
        a.idiomatic_expressions ? nlohmann::json(*a.idiomatic_expressions) : nullptr},
       {"draft_translation", a.draft_translation}};
}

void from_json(const nlohmann::json& j, ResearchArtifacts& a) {
  a = parse_artifacts(j.dump());
}

namespace {
template <class T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}
}  // namespace

void to_json(nlohmann::json& j, const StageOutputs& o) {
  j = {{"doc_id", o.doc_id},
       {"mode", "sbys"},
       {"stages", o.stage_set.to_string()},
       {"research_response", opt(o.research_response)},
       {"artifacts", opt(o.artifacts)},
       {"extraction_error", opt(o.extraction_error)},
       {"zero_shot", opt(o.zero_shot)},
       {"draft", opt(o.draft)},
       {"refined", opt(o.refined)},
       {"final", o.final},
       {"flags", o.flags}};
}

void from_json(const nlohmann::json& j, StageOutputs& o) {
  o.doc_id = j.at("doc_id").get<std::string>();
  o.stage_set = StageSet::parse(j.at("stages").get<std::string>());
  o.research_response = opt_string(j, "research_response");
  o.artifacts.reset();
  if (const auto it = j.find("artifacts"); it != j.end() && !it->is_null()) {
    o.artifacts = it->get<ResearchArtifacts>();
  }
  o.extraction_error = opt_string(j, "extraction_error");
  o.zero_shot = opt_string(j, "zero_shot");
  o.draft = opt_string(j, "draft");
  o.refined = opt_string(j, "refined");
  o.final = j.at("final").get<std::string>();
  o.flags = j.value("flags", std::vector<std::string>{});
}

}  // namespace sbys
