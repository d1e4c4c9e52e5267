// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "agentkit/common/json.hpp"
#include "agentkit/config/agent_config.hpp"

namespace agentkit::config {

/// What a config may reference: backends, context managers and toolkit contents.
struct RegistrySnapshot {
  std::set<std::string> env_backends = builtin_env_backends();
  std::set<std::string> context_managers = builtin_context_managers();
  std::map<std::string, std::vector<std::string>> toolkits;
};

enum class FindingKind {
  SyntaxError,
  SchemaError,
  InvalidName,
  EmptyInstructions,
  InvalidSampling,
  TimeoutOrder,
  EmptyToolName,
  DuplicateTool,
  DuplicateToolkit,
  UnknownEnv,
  UnknownContextManager,
  UnknownToolkit,
  UnknownTool,
};

const char* to_string(FindingKind kind);

struct Finding {
  FindingKind kind;
  std::string path;
  std::string message;
  std::optional<std::string> suggestion;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Finding> findings;

  Json to_json() const;
};

/// Structural checks only (invariants of the schema types).
std::vector<Finding> structural_findings(const AgentConfig& cfg);

/// Structural and referential checks; never throws.
ValidationReport validate_config(const AgentConfig& cfg, const RegistrySnapshot& registries);

/// Parses then validates; parse failures become findings with their path.
ValidationReport validate_config_text(std::string_view yaml_text, const RegistrySnapshot& registries);

}  // namespace agentkit::config
