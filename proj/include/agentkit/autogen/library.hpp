// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "agentkit/common/error.hpp"
#include "agentkit/config/validate.hpp"
#include "agentkit/tools/catalog.hpp"

namespace agentkit::autogen {

class GenerationError : public Error {
 public:
  /// stage: "clarify", "tools", "instructions", "assemble" or "no_config".
  GenerationError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }
  /// 1-4 for the workflow stages, 0 otherwise.
  int stage_number() const;

 private:
  std::string stage_;
};

class LibraryError : public Error {
 public:
  using Error::Error;
};

enum class CreatedBy { builtin, workflow, meta_agent };
const char* to_string(CreatedBy c);
CreatedBy created_by_from_string(const std::string& s);

struct TestReport {
  bool passed = false;
  int rounds_used = 0;
  std::string last_error;

  bool operator==(const TestReport&) const = default;
};

/// A generated tool: one Python function plus its self-test.
struct SynthesizedTool {
  /// Declaration only (no handler); source=synthesized, toolkit name = tool name.
  tools::ToolDef tool;
  std::string source_code;
  std::string self_test;
  TestReport report;
  std::vector<std::string> tags;
};

struct LibraryEntry {
  std::string toolkit;
  std::string name;
  std::string description;
  Json parameters = Json::object();
  std::vector<std::string> tags;
  CreatedBy created_by = CreatedBy::builtin;
  std::string created_at;
  std::optional<SynthesizedTool> synthesized;

  /// "toolkit.tool", or just the name when a toolkit holds a single same-named tool.
  std::string qualified() const { return toolkit == name ? name : toolkit + "." + name; }
};

Json to_json(const LibraryEntry& e);

/// Searchable collection of builtin and synthesized tools. Registrations are
/// serialized; lookups may run concurrently.
class ToolLibrary {
 public:
  ToolLibrary() = default;
  /// Builtin entries for every tool of every catalog toolkit, tagged with the toolkit name and known topic words.
  explicit ToolLibrary(const tools::ToolkitCatalog& catalog);

  /// Throws LibraryError if the name is taken or the self-test did not pass.
  void add_synthesized(const SynthesizedTool& tool, CreatedBy by);
  void add_entry(LibraryEntry entry);

  std::vector<LibraryEntry> entries() const;
  std::optional<LibraryEntry> find(const std::string& qualified_or_name) const;
  bool has_tool_name(const std::string& name) const;

  /// Toolkits and tool names for config validation.
  config::RegistrySnapshot snapshot() const;

  /// Adds (or replaces) one script-backed toolkit per synthesized tool.
  void install(tools::ToolkitCatalog& catalog) const;

  /// <dir>/library.json plus <dir>/tools/<name>.py and <name>_test.py per synthesized tool.
  void save(const std::filesystem::path& dir) const;
  /// Adds the synthesized tools saved under `dir`; a missing directory is an empty library.
  void load(const std::filesystem::path& dir);

 private:
  mutable std::shared_mutex mu_;
  std::vector<LibraryEntry> entries_;
};

/// Ranks entries by the number of distinct query tokens found in their
/// toolkit, name, description and tags (case-insensitive). Zero-score entries
/// are dropped; ties go to the lexicographically smaller qualified name.
std::vector<LibraryEntry> search_tools(const ToolLibrary& lib, const std::string& query, std::size_t k);

}  // namespace agentkit::autogen
