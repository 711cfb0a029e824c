#include "sbys/batch.hpp"

#include <optional>

#include "sbys/error.hpp"

namespace sbys {

void to_json(nlohmann::json& j, const DocumentFailure& f) {
  j = {{"doc_id", f.doc_id}, {"stage", f.stage}, {"kind", f.kind}, {"message", f.message}};
}

BatchResult run_batch(const std::vector<AssembledDocument>& docs, const StageSet& stages,
                      const TranslationContext& ctx, const BatchOptions& options) {
  if (!stages.valid()) {
    throw PreconditionError("invalid stage set '" + stages.to_string() + "'");
  }
  BatchResult result;
  result.manifest.mode = "sbys";
  result.manifest.stage_set = stages.to_string();
  result.manifest.model_id = ctx.backend.model_id();
  result.manifest.template_digests = ctx.templates.all_digests();
  result.manifest.corpus_digest = corpus_digest(docs);
  result.manifest.started_at = utc_now_iso8601();
  if (!docs.empty()) {
    result.manifest.source_lang = docs.front().source_lang;
    result.manifest.target_lang = docs.front().target_lang;
  }
  if (stages.refine && !stages.draft) {
    result.manifest.reconstructions["refinement_seed"] =
        "refinement continues the zero-shot exchange";
  }
  if (stages.draft && !stages.research) {
    result.manifest.reconstructions["single_turn_draft"] =
        "drafting prompt prefixed with the research prompt's context header";
  }

  std::vector<std::optional<StageOutputs>> slots(docs.size());
  std::vector<std::optional<DocumentFailure>> errors(docs.size());
  parallel_for(docs.size(), options.concurrency, [&](std::size_t i) {
    try {
      slots[i] = run_step_by_step(docs[i], stages, ctx, options.pipeline);
    } catch (const StageFailure& e) {
      errors[i] = DocumentFailure{e.doc_id(), e.stage(), e.kind(), e.what()};
    } catch (const Error& e) {
      errors[i] = DocumentFailure{docs[i].id, "", e.kind(), e.what()};
    } catch (const std::exception& e) {
      errors[i] = DocumentFailure{docs[i].id, "", "InternalError", e.what()};
    }
  });
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (slots[i]) result.outputs.push_back(std::move(*slots[i]));
    if (errors[i]) result.failures.push_back(std::move(*errors[i]));
  }
  result.manifest.documents = docs.size();
  result.manifest.failures = result.failures.size();
  result.manifest.finished_at = utc_now_iso8601();
  return result;
}

}  // namespace sbys
