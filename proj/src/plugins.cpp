#include <httplib.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "sbys/error.hpp"
#include "sbys/metrics.hpp"

namespace sbys {

std::string_view to_string(Orientation o) {
  return o == Orientation::lower_better ? "lower_better" : "higher_better";
}

Orientation orientation_from_string(std::string_view name) {
  if (name == "lower_better") return Orientation::lower_better;
  if (name == "higher_better") return Orientation::higher_better;
  throw ConfigError("orientation must be 'lower_better' or 'higher_better', got '" +
                    std::string(name) + "'");
}

std::string_view to_string(Transport t) {
  switch (t) {
    case Transport::builtin: return "builtin";
    case Transport::subprocess: return "subprocess";
    case Transport::http: return "http";
  }
  return "unknown";
}

std::size_t argbest(std::span<const double> values, Orientation o) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (strictly_better(values[i], values[best], o)) best = i;
  }
  return best;
}

MetricPluginSpec plugin_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("plugin: expected a JSON object");
  MetricPluginSpec spec;
  auto str = [&](const char* key, bool required) -> std::string {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) throw ConfigError(std::string("plugin.") + key + ": required");
      return {};
    }
    if (!it->is_string()) throw ConfigError(std::string("plugin.") + key + ": expected a string");
    return it->get<std::string>();
  };
  auto flag = [&](const char* key, bool fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) {
      throw ConfigError(std::string("plugin.") + key + ": expected true or false");
    }
    return it->get<bool>();
  };
  spec.name = str("name", true);
  const auto transport = str("transport", true);
  if (transport == "builtin") {
    spec.transport = Transport::builtin;
  } else if (transport == "subprocess") {
    spec.transport = Transport::subprocess;
    spec.command = str("command", true);
  } else if (transport == "http") {
    spec.transport = Transport::http;
    spec.url = str("url", true);
  } else {
    throw ConfigError("plugin.transport: expected builtin, subprocess or http, got '" +
                      transport + "'");
  }
  try {
    spec.orientation = orientation_from_string(str("orientation", true));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("plugin.orientation: ") + e.what());
  }
  spec.needs_reference = flag("needs_reference", true);
  spec.needs_source = flag("needs_source", false);
  return spec;
}

nlohmann::json to_wire(const ScoreRequest& r) {
  nlohmann::json j = {{"id", r.id}, {"hypothesis", r.hypothesis}};
  if (r.source) j["source"] = *r.source;
  if (r.reference) j["reference"] = *r.reference;
  return j;
}

std::vector<double> parse_score_response(std::string_view jsonl,
                                         const std::vector<ScoreRequest>& requests) {
  std::map<std::string, double> by_id;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const auto line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto& score = j.at("score");
      if (!score.is_number()) throw PluginProtocolError("score is not a number");
      const double value = score.get<double>();
      if (!std::isfinite(value)) throw PluginProtocolError("score is not finite");
      by_id[j.at("id").get<std::string>()] = value;
    } catch (const nlohmann::json::exception& e) {
      throw PluginProtocolError("response line " + std::to_string(line_no) + ": " + e.what());
    } catch (const PluginProtocolError& e) {
      throw PluginProtocolError("response line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::vector<double> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      throw PluginProtocolError("plugin response has no score for id '" + r.id + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> MetricPlugin::score(const std::vector<ScoreRequest>& requests) {
  std::lock_guard lock(mutex_);
  ++calls_;
  return score_impl(requests);
}

std::size_t MetricPlugin::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

ChrfPlugin::ChrfPlugin(ChrfConfig config)
    : MetricPlugin({"chrf", Orientation::higher_better, true, false, Transport::builtin, {}, {}}),
      config_(config) {}

std::vector<double> ChrfPlugin::score_impl(const std::vector<ScoreRequest>& requests) {
  std::vector<double> out;
  for (const auto& r : requests) {
    if (!r.reference) throw MissingReference("no reference for document '" + r.id + "'");
    out.push_back(chrf_sentence(r.hypothesis, *r.reference, config_));
  }
  return out;
}

ChrfPseudoQePlugin::ChrfPseudoQePlugin()
    : MetricPlugin(
          {"chrf-pseudo", Orientation::higher_better, false, true, Transport::builtin, {}, {}}) {}

std::vector<double> ChrfPseudoQePlugin::score_impl(const std::vector<ScoreRequest>& requests) {
  std::vector<double> out;
  for (const auto& r : requests) {
    if (!r.source) throw PreconditionError("chrf-pseudo needs the source text for '" + r.id + "'");
    out.push_back(chrf_sentence(r.hypothesis, *r.source));
  }
  return out;
}

SubprocessPlugin::SubprocessPlugin(MetricPluginSpec spec) : MetricPlugin(std::move(spec)) {}

std::vector<double> SubprocessPlugin::score_impl(const std::vector<ScoreRequest>& requests) {
  const auto dir = std::filesystem::temp_directory_path();
  auto request_file = dir / ("sbys-metric-" + std::to_string(::getpid()) + "-" +
                             std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".jsonl");
  {
    std::ofstream out(request_file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write plugin request file '" + request_file.string() + "'");
    for (const auto& r : requests) out << to_wire(r).dump() << '\n';
  }
  const auto command = spec().command + " < '" + request_file.string() + "'";
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(request_file);
    throw PluginProtocolError("cannot start plugin command '" + spec().command + "'");
  }
  std::string output;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = ::pclose(pipe);
  std::filesystem::remove(request_file);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw PluginProtocolError("plugin command '" + spec().command + "' exited with status " +
                              std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : status));
  }
  return parse_score_response(output, requests);
}

HttpPlugin::HttpPlugin(MetricPluginSpec spec) : MetricPlugin(std::move(spec)) {}

std::vector<double> HttpPlugin::score_impl(const std::vector<ScoreRequest>& requests) {
  const auto& url = spec().url;
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("plugin.url: '" + url + "' has no scheme");
  const auto slash = url.find('/', scheme + 3);
  const auto base = slash == std::string::npos ? url : url.substr(0, slash);
  const auto path = slash == std::string::npos ? std::string("/") : url.substr(slash);
  std::string body;
  for (const auto& r : requests) body += to_wire(r).dump() + "\n";
  httplib::Client client(base);
  client.set_read_timeout(600, 0);
  auto res = client.Post(path, body, "application/x-ndjson");
  if (!res) {
    throw PluginProtocolError("metric endpoint " + base + " unreachable: " +
                              httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw PluginProtocolError("metric endpoint returned HTTP " + std::to_string(res->status));
  }
  return parse_score_response(res->body, requests);
}

std::unique_ptr<MetricPlugin> make_plugin(const MetricPluginSpec& spec) {
  switch (spec.transport) {
    case Transport::builtin:
      if (spec.name == "chrf") return std::make_unique<ChrfPlugin>();
      if (spec.name == "chrf-pseudo") return std::make_unique<ChrfPseudoQePlugin>();
      throw ConfigError("unknown builtin metric '" + spec.name + "'");
    case Transport::subprocess:
      return std::make_unique<SubprocessPlugin>(spec);
    case Transport::http:
      return std::make_unique<HttpPlugin>(spec);
  }
  throw ConfigError("unsupported plugin transport");
}

std::unique_ptr<MetricPlugin> make_plugin(std::string_view name_or_path) {
  if (name_or_path == "chrf") return std::make_unique<ChrfPlugin>();
  if (name_or_path == "chrf-pseudo") return std::make_unique<ChrfPseudoQePlugin>();
  const std::filesystem::path path(name_or_path);
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("metric '" + std::string(name_or_path) +
                      "' is neither a builtin (chrf, chrf-pseudo) nor a readable plugin config");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return make_plugin(plugin_spec_from_json(j));
}

std::vector<ScoredDocument> score_system(
    MetricPlugin& plugin, const std::string& system,
    const std::map<std::string, std::string>& hypotheses,
    const std::optional<std::map<std::string, std::string>>& references,
    const std::optional<std::map<std::string, std::string>>& sources) {
  const auto& spec = plugin.spec();
  std::vector<ScoreRequest> requests;
  for (const auto& [doc_id, hyp] : hypotheses) {
    ScoreRequest r{doc_id, hyp, std::nullopt, std::nullopt};
    if (references) {
      if (const auto it = references->find(doc_id); it != references->end()) r.reference = it->second;
    }
    if (sources) {
      if (const auto it = sources->find(doc_id); it != sources->end()) r.source = it->second;
    }
    if (spec.needs_reference && !r.reference) {
      throw MissingReference("no reference for document '" + doc_id + "'");
    }
    if (spec.needs_source && !r.source) {
      throw PreconditionError("metric '" + spec.name + "' needs a source for '" + doc_id + "'");
    }
    requests.push_back(std::move(r));
  }
  if (requests.empty()) return {};
  const auto values = plugin.score(requests);
  if (values.size() != requests.size()) {
    throw PluginProtocolError("metric '" + spec.name + "' returned " +
                              std::to_string(values.size()) + " scores for " +
                              std::to_string(requests.size()) + " requests");
  }
  std::vector<ScoredDocument> out;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw PluginProtocolError("non-finite score for '" + requests[i].id + "'");
    }
    out.push_back({requests[i].id, system, values[i], spec.name});
  }
  return out;
}

}  // namespace sbys
