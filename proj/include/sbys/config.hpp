#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "sbys/baselines.hpp"
#include "sbys/llm.hpp"
#include "sbys/prompts.hpp"

namespace sbys {

// Run configuration, read from a JSON file:
//
// {
//   "backend":    {"kind": "mock|replay|http", "endpoint": "...", "model_id": "...",
//                  "auth_env": "SBYS_API_KEY", "requests_per_minute": 30},
//   "generation": {"temperature": 0, "max_output_tokens": 4096, "timeout_ms": 120000,
//                  "retries": 3, "backoff_ms": 500},
//   "cache": "path/to/cache.jsonl",
//   "concurrency": 4,
//   "seed": 0,
//   "cap": 250,
//   "languages": {"de": "German"},
//   "prompts_dir": "dir", "prompt_variant": "verbatim|revised",
//   "maps": {"demonstrations": "demos.json", "selector": "chrf-pseudo|path",
//            "selector_mode": "qe|reference"}
// }
//
// Every key is optional. Unknown keys and wrong types throw ConfigError
// naming the path, e.g. "config.backend.endpoint: expected a string".
struct RunConfig {
  BackendDescriptor backend;
  GenerationConfig generation;
  std::optional<std::filesystem::path> cache;
  std::size_t concurrency = 4;
  std::uint64_t seed = 0;
  std::size_t cap = 250;
  std::map<std::string, std::string> languages;
  std::optional<std::filesystem::path> prompts_dir;
  PromptVariant prompt_variant = PromptVariant::verbatim;
  std::optional<std::filesystem::path> maps_demonstrations;
  std::string maps_selector = "chrf-pseudo";
  SelectorMode maps_selector_mode = SelectorMode::qe;
};

RunConfig config_from_json(const nlohmann::json& j);
// Relative paths in the file resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
// Snapshot for manifests. Holds the auth env var name only.
nlohmann::json to_json(const RunConfig& config);

TemplateRegistry make_templates(const RunConfig& config);
LanguageNames make_languages(const RunConfig& config);

}  // namespace sbys
