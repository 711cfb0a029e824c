#include "sbys/prompts.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbys/digest.hpp"
#include "sbys/error.hpp"

namespace sbys {
namespace {

constexpr std::string_view kOpen = "{{";
constexpr std::string_view kClose = "}}";

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_';
}

// Finds the next well-formed marker at or after `from`. Returns npos when
// there is none; `name` receives the placeholder name.
std::size_t next_marker(std::string_view body, std::size_t from, std::string_view& name) {
  while (true) {
    const auto open = body.find(kOpen, from);
    if (open == std::string_view::npos) return open;
    const auto close = body.find(kClose, open + kOpen.size());
    if (close == std::string_view::npos) return close;
    const auto candidate = body.substr(open + kOpen.size(), close - open - kOpen.size());
    bool ok = !candidate.empty();
    for (const char c : candidate) ok = ok && is_name_char(c);
    if (ok) {
      name = candidate;
      return open;
    }
    from = open + 1;
  }
}

PromptTemplate make_template(TemplateId id, std::string body) {
  PromptTemplate t{id, std::move(body), {}};
  t.required_placeholders = placeholders_in(t.body);
  return t;
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::research: return "research";
    case TemplateId::drafting: return "drafting";
    case TemplateId::refinement: return "refinement";
    case TemplateId::proofreading: return "proofreading";
    case TemplateId::zero_shot: return "zero_shot";
    case TemplateId::zero_shot_in_context: return "zero_shot_in_context";
    case TemplateId::draft_json: return "draft_json";
    case TemplateId::maps_keywords: return "maps_keywords";
    case TemplateId::maps_topic: return "maps_topic";
    case TemplateId::maps_demo: return "maps_demo";
    case TemplateId::maps_candidate: return "maps_candidate";
  }
  return "unknown";
}

TemplateId template_id_from_string(std::string_view name) {
  for (const auto id : kAllTemplateIds) {
    if (to_string(id) == name) return id;
  }
  throw UnknownTemplate("unknown template id '" + std::string(name) + "'");
}

std::set<std::string> placeholders_in(std::string_view body) {
  std::set<std::string> names;
  std::string_view name;
  std::size_t pos = 0;
  while ((pos = next_marker(body, pos, name)) != std::string_view::npos) {
    names.emplace(name);
    pos += kOpen.size() + name.size() + kClose.size();
  }
  return names;
}

std::string substitute(std::string_view body, const Bindings& bindings) {
  std::string out;
  out.reserve(body.size());
  std::string_view name;
  std::size_t pos = 0;
  while (true) {
    const auto at = next_marker(body, pos, name);
    if (at == std::string_view::npos) {
      out.append(body.substr(pos));
      return out;
    }
    out.append(body.substr(pos, at - pos));
    const auto it = bindings.find(std::string(name));
    if (it == bindings.end()) throw MissingPlaceholder(std::string(name));
    out.append(it->second);
    pos = at + kOpen.size() + name.size() + kClose.size();
  }
}

std::string bindings_digest(const Bindings& bindings) {
  return sha256_hex(nlohmann::json(bindings).dump());
}

std::string strip_trailing_newline(std::string text) {
  if (!text.empty() && text.back() == '\n') {
    text.pop_back();
    if (!text.empty() && text.back() == '\r') text.pop_back();
  }
  return text;
}

TemplateRegistry TemplateRegistry::builtin(PromptVariant variant) {
  TemplateRegistry reg;
  for (const auto& p : detail::embedded_verbatim_prompts()) {
    const auto id = template_id_from_string(p.id);
    reg.templates_.insert_or_assign(id, make_template(id, strip_trailing_newline(p.body)));
  }
  if (variant == PromptVariant::revised) {
    for (const auto& p : detail::embedded_revised_prompts()) {
      const auto id = template_id_from_string(p.id);
      reg.templates_.insert_or_assign(id, make_template(id, strip_trailing_newline(p.body)));
    }
  }
  for (const auto id : kAllTemplateIds) {
    if (!reg.templates_.contains(id)) {
      throw UnknownTemplate("built-in prompt set lacks template '" + std::string(to_string(id)) +
                            "'");
    }
  }
  return reg;
}

TemplateRegistry TemplateRegistry::with_overrides(const std::filesystem::path& dir,
                                                  PromptVariant variant) {
  auto reg = builtin(variant);
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("prompt directory '" + dir.string() + "' does not exist");
  }
  for (const auto id : kAllTemplateIds) {
    const auto file = dir / (std::string(to_string(id)) + ".txt");
    if (!std::filesystem::exists(file)) continue;
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read '" + file.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    reg.templates_.insert_or_assign(id, make_template(id, strip_trailing_newline(buf.str())));
  }
  return reg;
}

const PromptTemplate& TemplateRegistry::get(TemplateId id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw UnknownTemplate("template '" + std::string(to_string(id)) + "' is not registered");
  }
  return it->second;
}

RenderedPrompt TemplateRegistry::render(TemplateId id, const Bindings& bindings) const {
  const auto& t = get(id);
  for (const auto& name : t.required_placeholders) {
    if (!bindings.contains(name)) throw MissingPlaceholder(name);
  }
  return {id, substitute(t.body, bindings), bindings_digest(bindings)};
}

std::string TemplateRegistry::digest(TemplateId id) const {
  return sha256_hex(get(id).body);
}

std::map<std::string, std::string> TemplateRegistry::all_digests() const {
  std::map<std::string, std::string> out;
  for (const auto& [id, t] : templates_) out[std::string(to_string(id))] = sha256_hex(t.body);
  return out;
}

std::string TemplateRegistry::draft_context_header(const Bindings& bindings) const {
  const auto& body = get(TemplateId::research).body;
  const auto ctx = body.find("Context: ");
  if (ctx == std::string::npos) {
    throw UnknownTemplate("research template has no 'Context:' line");
  }
  auto end = body.find('\n', ctx);
  if (end == std::string::npos) end = body.size();
  return substitute(std::string_view(body).substr(0, end), bindings);
}

RenderedPrompt render(TemplateId id, const Bindings& bindings) {
  static const auto registry = TemplateRegistry::builtin();
  return registry.render(id, bindings);
}

std::string template_digest(TemplateId id) {
  static const auto registry = TemplateRegistry::builtin();
  return registry.digest(id);
}

}  // namespace sbys
