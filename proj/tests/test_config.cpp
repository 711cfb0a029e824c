#include <doctest.h>

#include <string>

#include "sbys/config.hpp"
#include "sbys/error.hpp"

using namespace sbys;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults") {
  const auto c = config_from_json(json::object());
  CHECK(c.backend.kind == BackendKind::mock);
  CHECK(c.generation.temperature == 0.0);
  CHECK(c.concurrency == 4);
  CHECK(c.cap == 250);
}

TEST_CASE("full config") {
  const auto c = config_from_json(json::parse(R"({
    "backend": {"kind": "http", "endpoint": "http://localhost:1/v1/chat/completions",
                "model_id": "m", "auth_env": "KEY", "requests_per_minute": 10},
    "generation": {"temperature": 0, "max_output_tokens": 100, "timeout_ms": 1000,
                   "retries": 1, "backoff_ms": 5},
    "concurrency": 2, "seed": 17, "cap": 150,
    "languages": {"xx": "Example"},
    "prompt_variant": "revised",
    "maps": {"selector": "chrf-pseudo", "selector_mode": "reference"}
  })"));
  CHECK(c.backend.kind == BackendKind::http_chat);
  CHECK(c.generation.max_output_tokens == 100);
  CHECK(c.seed == 17);
  CHECK(c.cap == 150);
  CHECK(c.prompt_variant == PromptVariant::revised);
  CHECK(c.maps_selector_mode == SelectorMode::reference);
  CHECK(make_languages(c).name("xx") == "Example");
  const auto snap = to_json(c);
  CHECK(snap.at("backend").at("auth_env") == "KEY");
}

TEST_CASE("errors name the offending path") {
  CHECK(error_of({{"backend", {{"endpoint", 3}}}}).starts_with("config.backend.endpoint:"));
  CHECK(error_of({{"backend", {{"kind", "http"}}}}).starts_with("config.backend.endpoint:"));
  CHECK(error_of({{"bogus", 1}}).starts_with("config.bogus: unknown key"));
  CHECK(error_of({{"generation", {{"retries", -1}}}}).starts_with("config.generation.retries:"));
  CHECK(error_of({{"concurrency", 0}}).starts_with("config.concurrency:"));
  CHECK(error_of({{"maps", {{"selector_mode", "best"}}}}).starts_with("config.maps.selector_mode:"));
  CHECK(error_of({{"languages", {{"de", 1}}}}).starts_with("config.languages.de:"));
}
