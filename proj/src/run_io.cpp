#include "sbys/run_io.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "sbys/error.hpp"

namespace sbys {

std::vector<std::string> RunManifest::missing_fields() const {
  std::vector<std::string> missing;
  auto need = [&](bool ok, const char* name) {
    if (!ok) missing.emplace_back(name);
  };
  need(!run_id.empty(), "run_id");
  need(!mode.empty(), "mode");
  need(!stage_set.empty(), "stage_set");
  need(!model_id.empty(), "model_id");
  need(!config.empty(), "config");
  need(!template_digests.empty(), "template_digests");
  need(!corpus_digest.empty(), "corpus_digest");
  need(seed.has_value(), "seed");
  need(!cache_stats.empty(), "cache_stats");
  need(!started_at.empty(), "started_at");
  need(!finished_at.empty(), "finished_at");
  return missing;
}

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = {{"run_id", m.run_id},
       {"mode", m.mode},
       {"stage_set", m.stage_set},
       {"model_id", m.model_id},
       {"source_lang", m.source_lang},
       {"target_lang", m.target_lang},
       {"config", m.config},
       {"template_digests", m.template_digests},
       {"corpus_digest", m.corpus_digest},
       {"seed", m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr)},
       {"cache_stats", m.cache_stats},
       {"started_at", m.started_at},
       {"finished_at", m.finished_at},
       {"documents", m.documents},
       {"failures", m.failures},
       {"reconstructions", m.reconstructions}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  m.run_id = j.at("run_id").get<std::string>();
  m.mode = j.at("mode").get<std::string>();
  m.stage_set = j.value("stage_set", std::string{});
  m.model_id = j.value("model_id", std::string{});
  m.source_lang = j.value("source_lang", std::string{});
  m.target_lang = j.value("target_lang", std::string{});
  m.config = j.value("config", nlohmann::json::object());
  m.template_digests =
      j.value("template_digests", std::map<std::string, std::string>{});
  m.corpus_digest = j.value("corpus_digest", std::string{});
  m.seed.reset();
  if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    m.seed = it->get<std::uint64_t>();
  }
  m.cache_stats = j.value("cache_stats", nlohmann::json::object());
  m.started_at = j.value("started_at", std::string{});
  m.finished_at = j.value("finished_at", std::string{});
  m.documents = j.value("documents", std::size_t{0});
  m.failures = j.value("failures", std::size_t{0});
  m.reconstructions = j.value("reconstructions", std::map<std::string, std::string>{});
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines) {
  std::string text;
  for (const auto& line : lines) {
    text += line.dump();
    text += '\n';
  }
  write_text(path, text);
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest) {
  write_text(run_dir / "manifest.json", nlohmann::json(manifest).dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "manifest.json";
  try {
    return nlohmann::json::parse(read_text(path)).get<RunManifest>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

std::map<std::string, std::string> read_final_translations(const std::filesystem::path& run_dir) {
  std::map<std::string, std::string> finals;
  for (const auto& j : read_jsonl(run_dir / "outputs.jsonl")) {
    finals[j.at("doc_id").get<std::string>()] = j.at("final").get<std::string>();
  }
  return finals;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("FormatError", "cannot format double");
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ParseError(rows.size() + 1, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string scores_to_csv(const std::vector<ScoreRow>& rows) {
  std::string out = "system,doc_id,domain,metric,value\n";
  for (const auto& r : rows) {
    out += csv_field(r.system) + ',' + csv_field(r.doc_id) + ',' + csv_field(r.domain) + ',' +
           csv_field(r.metric) + ',' + format_double(r.value) + '\n';
  }
  return out;
}

std::vector<ScoreRow> scores_from_csv(const std::string& csv) {
  const auto rows = parse_csv(csv);
  if (rows.empty()) throw ParseError(1, "scores CSV has no header");
  const std::vector<std::string> header = {"system", "doc_id", "domain", "metric", "value"};
  if (rows.front() != header) {
    throw ParseError(1, "scores CSV header must be system,doc_id,domain,metric,value");
  }
  std::vector<ScoreRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 5) throw ParseError(i + 1, "expected 5 fields");
    double value = 0;
    const auto* end = r[4].data() + r[4].size();
    const auto [ptr, ec] = std::from_chars(r[4].data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ParseError(i + 1, "bad value '" + r[4] + "'");
    out.push_back({r[0], r[1], r[2], r[3], value});
  }
  return out;
}

void write_scores_csv(const std::filesystem::path& path, const std::vector<ScoreRow>& rows) {
  write_text(path, scores_to_csv(rows));
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
  return scores_from_csv(read_text(path));
}

}  // namespace sbys
