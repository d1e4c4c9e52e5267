// SPDX-License-Identifier: Apache-2.0
#include "agentkit/autogen/library.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>

#include "agentkit/autogen/synthesis.hpp"
#include "agentkit/common/text.hpp"

namespace agentkit::autogen {
namespace {

const std::map<std::string, std::vector<std::string>>& builtin_tags() {
  static const std::map<std::string, std::vector<std::string>> tags{
      {"search", {"web", "search", "internet", "browse", "qa", "lookup"}},
      {"arxiv", {"arxiv", "paper", "pdf", "research", "academic", "download"}},
      {"python_executor", {"python", "code", "execution", "compute", "calculation"}},
      {"shell", {"shell", "command", "bash", "terminal"}},
      {"file", {"file", "read", "write", "storage"}},
      {"time", {"time", "date", "clock"}},
      {"math_eval", {"math", "calculator", "arithmetic"}},
      {"env_state", {"environment", "state"}},
  };
  return tags;
}

std::string now_iso() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LibraryError("cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw LibraryError("cannot write " + p.string());
  out << body;
}

}  // namespace

GenerationError::GenerationError(std::string stage, const std::string& message)
    : Error(fmt::format("generation failed at {}: {}", stage, message)), stage_(std::move(stage)) {}

int GenerationError::stage_number() const {
  if (stage_ == "clarify") return 1;
  if (stage_ == "tools") return 2;
  if (stage_ == "instructions") return 3;
  if (stage_ == "assemble") return 4;
  return 0;
}

const char* to_string(CreatedBy c) {
  switch (c) {
    case CreatedBy::builtin: return "builtin";
    case CreatedBy::workflow: return "workflow";
    case CreatedBy::meta_agent: return "meta_agent";
  }
  return "unknown";
}

CreatedBy created_by_from_string(const std::string& s) {
  for (auto c : {CreatedBy::builtin, CreatedBy::workflow, CreatedBy::meta_agent})
    if (s == to_string(c)) return c;
  throw std::invalid_argument("unknown created_by: " + s);
}

Json to_json(const LibraryEntry& e) {
  Json j{{"toolkit", e.toolkit},       {"name", e.name},
         {"description", e.description}, {"parameters", e.parameters},
         {"tags", e.tags},             {"created_by", to_string(e.created_by)},
         {"created_at", e.created_at}};
  if (e.synthesized) {
    const auto& r = e.synthesized->report;
    j["test_report"] = Json{{"passed", r.passed}, {"rounds_used", r.rounds_used}, {"last_error", r.last_error}};
  }
  return j;
}

ToolLibrary::ToolLibrary(const tools::ToolkitCatalog& catalog) {
  std::shared_ptr<env::Environment> no_env;
  for (const auto& toolkit : catalog.names()) {
    const auto* f = catalog.find(toolkit);
    std::vector<std::string> tags{toolkit};
    if (auto it = builtin_tags().find(toolkit); it != builtin_tags().end())
      for (const auto& t : it->second)
        if (t != toolkit) tags.push_back(t);
    std::map<std::string, tools::ToolDef> defs;
    if (!f->needs_env) {
      try {
        for (auto& d : f->make(Json::object(), no_env)) defs.emplace(d.name, std::move(d));
      } catch (const std::exception&) {
      }
    }
    for (const auto& name : f->tools) {
      LibraryEntry e;
      e.toolkit = toolkit;
      e.name = name;
      if (auto it = defs.find(name); it != defs.end()) {
        e.description = it->second.description;
        e.parameters = it->second.parameters;
      } else {
        e.description = f->description;
      }
      e.tags = tags;
      e.created_by = CreatedBy::builtin;
      entries_.push_back(std::move(e));
    }
  }
}

void ToolLibrary::add_entry(LibraryEntry entry) {
  std::unique_lock lock(mu_);
  for (const auto& e : entries_)
    if (e.name == entry.name || e.toolkit == entry.name) throw LibraryError("tool name '" + entry.name + "' is already in the library");
  entries_.push_back(std::move(entry));
}

void ToolLibrary::add_synthesized(const SynthesizedTool& tool, CreatedBy by) {
  if (!tool.report.passed) throw LibraryError("tool '" + tool.tool.name + "' has no passing self-test");
  LibraryEntry e;
  e.toolkit = tool.tool.name;
  e.name = tool.tool.name;
  e.description = tool.tool.description;
  e.parameters = tool.tool.parameters;
  e.tags = tool.tags;
  e.created_by = by;
  e.created_at = now_iso();
  e.synthesized = tool;
  add_entry(std::move(e));
}

std::vector<LibraryEntry> ToolLibrary::entries() const {
  std::shared_lock lock(mu_);
  return entries_;
}

std::optional<LibraryEntry> ToolLibrary::find(const std::string& key) const {
  std::shared_lock lock(mu_);
  for (const auto& e : entries_)
    if (e.qualified() == key || e.name == key) return e;
  return std::nullopt;
}

bool ToolLibrary::has_tool_name(const std::string& name) const {
  std::shared_lock lock(mu_);
  return std::any_of(entries_.begin(), entries_.end(), [&](const LibraryEntry& e) { return e.name == name || e.toolkit == name; });
}

config::RegistrySnapshot ToolLibrary::snapshot() const {
  std::shared_lock lock(mu_);
  config::RegistrySnapshot s;
  for (const auto& e : entries_) s.toolkits[e.toolkit].push_back(e.name);
  return s;
}

void ToolLibrary::install(tools::ToolkitCatalog& catalog) const {
  std::shared_lock lock(mu_);
  for (const auto& e : entries_)
    if (e.synthesized) catalog.replace(e.toolkit, script_toolkit(*e.synthesized));
}

void ToolLibrary::save(const std::filesystem::path& dir) const {
  std::shared_lock lock(mu_);
  std::filesystem::create_directories(dir / "tools");
  Json meta = Json::array();
  for (const auto& e : entries_) {
    if (!e.synthesized) continue;
    Json j = to_json(e);
    j["source_file"] = "tools/" + e.name + ".py";
    j["test_file"] = "tools/" + e.name + "_test.py";
    write_file(dir / "tools" / (e.name + ".py"), e.synthesized->source_code);
    write_file(dir / "tools" / (e.name + "_test.py"), e.synthesized->self_test);
    meta.push_back(std::move(j));
  }
  write_file(dir / "library.json", Json{{"tools", meta}}.dump(2) + "\n");
}

void ToolLibrary::load(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "library.json")) return;
  Json meta;
  try {
    meta = Json::parse(read_file(dir / "library.json"));
  } catch (const Json::parse_error& e) {
    throw LibraryError("library.json is not JSON: " + std::string(e.what()));
  }
  for (const auto& j : meta.value("tools", Json::array())) {
    SynthesizedTool t;
    t.tool.name = j.at("name").get<std::string>();
    t.tool.description = j.value("description", "");
    t.tool.parameters = j.value("parameters", Json::object());
    t.tool.source = tools::ToolSource::synthesized;
    t.source_code = read_file(dir / j.at("source_file").get<std::string>());
    t.self_test = read_file(dir / j.at("test_file").get<std::string>());
    t.tool.binding = "script:" + (dir / j.at("source_file").get<std::string>()).string();
    const auto r = j.value("test_report", Json::object());
    t.report = {r.value("passed", false), r.value("rounds_used", 0), r.value("last_error", "")};
    t.tags = j.value("tags", std::vector<std::string>{});
    LibraryEntry e;
    e.toolkit = t.tool.name;
    e.name = t.tool.name;
    e.description = t.tool.description;
    e.parameters = t.tool.parameters;
    e.tags = t.tags;
    e.created_by = created_by_from_string(j.value("created_by", "workflow"));
    e.created_at = j.value("created_at", "");
    if (!t.report.passed) throw LibraryError("stored tool '" + t.tool.name + "' has no passing self-test");
    e.synthesized = std::move(t);
    add_entry(std::move(e));
  }
}

std::vector<LibraryEntry> search_tools(const ToolLibrary& lib, const std::string& query, std::size_t k) {
  if (k < 1) throw std::invalid_argument("search_tools needs k >= 1");
  const auto q = text::search_token_set(query);
  std::vector<std::pair<std::size_t, LibraryEntry>> scored;
  for (auto& e : lib.entries()) {
    std::string all = e.toolkit + " " + e.name + " " + e.description;
    for (const auto& t : e.tags) all += " " + t;
    const auto toks = text::search_token_set(all);
    std::size_t s = 0;
    for (const auto& t : q) s += toks.count(t);
    if (s > 0) scored.emplace_back(s, std::move(e));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second.qualified() < b.second.qualified();
  });
  std::vector<LibraryEntry> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(std::move(scored[i].second));
  return out;
}

}  // namespace agentkit::autogen
