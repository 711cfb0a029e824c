#include "sbys/config.hpp"

#include <set>

#include "sbys/error.hpp"
#include "sbys/run_io.hpp"

namespace sbys {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void only_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
  }
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& path, std::int64_t min) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < min) fail(path, "must be >= " + std::to_string(min));
  return v;
}

template <class Fn>
void with(const json& j, const char* key, const std::string& path, Fn&& fn) {
  if (const auto it = j.find(key); it != j.end()) fn(*it, path + "." + key);
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  const std::string root = "config";
  only_keys(j, root,
            {"backend", "generation", "cache", "concurrency", "seed", "cap", "languages",
             "prompts_dir", "prompt_variant", "maps"});

  with(j, "backend", root, [&](const json& b, const std::string& p) {
    only_keys(b, p, {"kind", "endpoint", "model_id", "auth_env", "requests_per_minute"});
    with(b, "kind", p, [&](const json& v, const std::string& q) {
      try {
        c.backend.kind = backend_kind_from_string(get_string(v, q));
      } catch (const UsageError&) {
        fail(q, "must be one of mock, replay, http");
      }
    });
    with(b, "endpoint", p, [&](const json& v, const std::string& q) {
      c.backend.endpoint = get_string(v, q);
    });
    with(b, "model_id", p, [&](const json& v, const std::string& q) {
      c.backend.model_id = get_string(v, q);
      if (c.backend.model_id.empty()) fail(q, "must not be empty");
    });
    with(b, "auth_env", p, [&](const json& v, const std::string& q) {
      c.backend.auth_env = get_string(v, q);
    });
    with(b, "requests_per_minute", p, [&](const json& v, const std::string& q) {
      c.backend.requests_per_minute = get_number(v, q);
      if (c.backend.requests_per_minute <= 0) fail(q, "must be > 0");
    });
    if (c.backend.kind == BackendKind::http_chat && !c.backend.endpoint) {
      fail(p + ".endpoint", "required for the http backend");
    }
  });

  with(j, "generation", root, [&](const json& g, const std::string& p) {
    only_keys(g, p, {"temperature", "max_output_tokens", "timeout_ms", "retries", "backoff_ms"});
    with(g, "temperature", p, [&](const json& v, const std::string& q) {
      c.generation.temperature = get_number(v, q);
      if (c.generation.temperature < 0) fail(q, "must be >= 0");
    });
    with(g, "max_output_tokens", p, [&](const json& v, const std::string& q) {
      c.generation.max_output_tokens = static_cast<int>(get_integer(v, q, 1));
    });
    with(g, "timeout_ms", p, [&](const json& v, const std::string& q) {
      c.generation.timeout = std::chrono::milliseconds(get_integer(v, q, 1));
    });
    with(g, "retries", p, [&](const json& v, const std::string& q) {
      c.generation.retries = static_cast<int>(get_integer(v, q, 0));
    });
    with(g, "backoff_ms", p, [&](const json& v, const std::string& q) {
      c.generation.backoff = std::chrono::milliseconds(get_integer(v, q, 0));
    });
  });

  with(j, "cache", root, [&](const json& v, const std::string& q) { c.cache = get_string(v, q); });
  with(j, "concurrency", root, [&](const json& v, const std::string& q) {
    c.concurrency = static_cast<std::size_t>(get_integer(v, q, 1));
  });
  with(j, "seed", root, [&](const json& v, const std::string& q) {
    c.seed = static_cast<std::uint64_t>(get_integer(v, q, 0));
  });
  with(j, "cap", root, [&](const json& v, const std::string& q) {
    c.cap = static_cast<std::size_t>(get_integer(v, q, 1));
  });
  with(j, "languages", root, [&](const json& l, const std::string& p) {
    if (!l.is_object()) fail(p, "expected an object");
    for (const auto& [tag, name] : l.items()) c.languages[tag] = get_string(name, p + "." + tag);
  });
  with(j, "prompts_dir", root, [&](const json& v, const std::string& q) {
    c.prompts_dir = get_string(v, q);
  });
  with(j, "prompt_variant", root, [&](const json& v, const std::string& q) {
    const auto s = get_string(v, q);
    if (s == "verbatim") {
      c.prompt_variant = PromptVariant::verbatim;
    } else if (s == "revised") {
      c.prompt_variant = PromptVariant::revised;
    } else {
      fail(q, "must be verbatim or revised");
    }
  });
  with(j, "maps", root, [&](const json& m, const std::string& p) {
    only_keys(m, p, {"demonstrations", "selector", "selector_mode"});
    with(m, "demonstrations", p, [&](const json& v, const std::string& q) {
      c.maps_demonstrations = get_string(v, q);
    });
    with(m, "selector", p, [&](const json& v, const std::string& q) {
      c.maps_selector = get_string(v, q);
    });
    with(m, "selector_mode", p, [&](const json& v, const std::string& q) {
      const auto s = get_string(v, q);
      if (s == "qe") {
        c.maps_selector_mode = SelectorMode::qe;
      } else if (s == "reference") {
        c.maps_selector_mode = SelectorMode::reference;
      } else {
        fail(q, "must be qe or reference");
      }
    });
  });
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  auto c = config_from_json(j);
  const auto base = path.parent_path();
  auto resolve = [&](std::optional<std::filesystem::path>& p) {
    if (p && p->is_relative()) p = base / *p;
  };
  resolve(c.cache);
  resolve(c.prompts_dir);
  resolve(c.maps_demonstrations);
  if (c.maps_selector.find('/') != std::string::npos ||
      c.maps_selector.ends_with(".json")) {
    std::filesystem::path sel = c.maps_selector;
    if (sel.is_relative()) c.maps_selector = (base / sel).string();
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j = {
      {"backend",
       {{"kind", to_string(c.backend.kind)},
        {"model_id", c.backend.model_id},
        {"auth_env", c.backend.auth_env},
        {"requests_per_minute", c.backend.requests_per_minute}}},
      {"generation",
       {{"temperature", c.generation.temperature},
        {"max_output_tokens", c.generation.max_output_tokens},
        {"timeout_ms", c.generation.timeout.count()},
        {"retries", c.generation.retries},
        {"backoff_ms", c.generation.backoff.count()}}},
      {"concurrency", c.concurrency},
      {"seed", c.seed},
      {"cap", c.cap},
      {"languages", c.languages},
      {"prompt_variant", c.prompt_variant == PromptVariant::revised ? "revised" : "verbatim"},
      {"maps",
       {{"selector", c.maps_selector},
        {"selector_mode", to_string(c.maps_selector_mode)}}},
  };
  if (c.backend.endpoint) j["backend"]["endpoint"] = *c.backend.endpoint;
  if (c.prompts_dir) j["prompts_dir"] = c.prompts_dir->string();
  if (c.maps_demonstrations) j["maps"]["demonstrations"] = c.maps_demonstrations->string();
  return j;
}

TemplateRegistry make_templates(const RunConfig& config) {
  if (config.prompts_dir) return TemplateRegistry::with_overrides(*config.prompts_dir, config.prompt_variant);
  return TemplateRegistry::builtin(config.prompt_variant);
}

LanguageNames make_languages(const RunConfig& config) {
  LanguageNames names;
  for (const auto& [tag, name] : config.languages) names.set(tag, name);
  return names;
}

}  // namespace sbys
