#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sbys {

enum class TemplateId {
  research,
  drafting,
  refinement,
  proofreading,
  zero_shot,
  zero_shot_in_context,
  draft_json,
  maps_keywords,
  maps_topic,
  maps_demo,
  maps_candidate,
};

inline constexpr TemplateId kAllTemplateIds[] = {
    TemplateId::research,       TemplateId::drafting,   TemplateId::refinement,
    TemplateId::proofreading,   TemplateId::zero_shot,  TemplateId::zero_shot_in_context,
    TemplateId::draft_json,     TemplateId::maps_keywords, TemplateId::maps_topic,
    TemplateId::maps_demo,      TemplateId::maps_candidate,
};

std::string_view to_string(TemplateId id);
// Throws UnknownTemplate.
TemplateId template_id_from_string(std::string_view name);

using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
  TemplateId id;
  std::string body;
  std::set<std::string> required_placeholders;
};

struct RenderedPrompt {
  TemplateId template_id;
  std::string text;
  std::string bindings_digest;
};

// Names of all `{{name}}` markers in `body`.
std::set<std::string> placeholders_in(std::string_view body);

// Single-pass substitution; text inside bound values is never re-expanded.
// Throws MissingPlaceholder for the first required name without a binding.
std::string substitute(std::string_view body, const Bindings& bindings);

std::string bindings_digest(const Bindings& bindings);

enum class PromptVariant { verbatim, revised };

// An immutable set of templates. The built-in set is compiled from the
// repository's prompts/ directory; a directory of `<id>.txt` files can
// override individual bodies.
class TemplateRegistry {
 public:
  static TemplateRegistry builtin(PromptVariant variant = PromptVariant::verbatim);

  // Starts from builtin(variant) and replaces any template for which
  // `<dir>/<id>.txt` exists.
  static TemplateRegistry with_overrides(const std::filesystem::path& dir,
                                         PromptVariant variant = PromptVariant::verbatim);

  const PromptTemplate& get(TemplateId id) const;
  RenderedPrompt render(TemplateId id, const Bindings& bindings) const;
  std::string digest(TemplateId id) const;
  std::map<std::string, std::string> all_digests() const;

  // The opening of the research prompt up to and including its
  // `Context:` line. Prefixed to the drafting prompt when drafting runs
  // without a preceding research turn.
  std::string draft_context_header(const Bindings& bindings) const;

 private:
  std::map<TemplateId, PromptTemplate> templates_;
};

// Free-function forms over the built-in verbatim set.
RenderedPrompt render(TemplateId id, const Bindings& bindings);
std::string template_digest(TemplateId id);

// Strips one trailing "\n" (and a preceding "\r").
std::string strip_trailing_newline(std::string text);

namespace detail {
struct EmbeddedPrompt {
  const char* id;
  const char* body;
};
const std::vector<EmbeddedPrompt>& embedded_verbatim_prompts();
const std::vector<EmbeddedPrompt>& embedded_revised_prompts();
}  // namespace detail

}  // namespace sbys
