// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "agentkit/config/agent_config.hpp"
#include "agentkit/config/validate.hpp"
#include "agentkit/env/environment.hpp"
#include "agentkit/tools/fetcher.hpp"
#include "agentkit/tools/registry.hpp"

namespace agentkit::tools {

/// Builds a toolkit's tools from its activation config and the episode's environment.
struct ToolkitFactory {
  std::string description;
  /// Names of every tool the toolkit provides, in declaration order.
  std::vector<std::string> tools;
  bool needs_env = false;
  std::function<std::vector<ToolDef>(const Json& config, const std::shared_ptr<env::Environment>& env)> make;
};

/// Named toolkits available to build_registry. Copyable; read-only while episodes run.
class ToolkitCatalog {
 public:
  /// search, web_qa and arxiv fetch through `fetcher` unless a toolkit config names a fixture.
  static ToolkitCatalog builtin(std::shared_ptr<Fetcher> fetcher = nullptr);

  /// Throws BindingError if the name is already present.
  void add(const std::string& name, ToolkitFactory factory);
  void replace(const std::string& name, ToolkitFactory factory);

  const ToolkitFactory* find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }
  std::vector<std::string> names() const;

  /// Registry view used by config validation.
  config::RegistrySnapshot snapshot() const;

 private:
  std::map<std::string, ToolkitFactory> factories_;
};

/// Registers exactly the activated tools of each configured toolkit, in config order.
/// Throws UnknownToolkit, UnknownTool or BindingError.
ToolRegistry build_registry(const config::AgentConfig& cfg, const std::shared_ptr<env::Environment>& env,
                            const ToolkitCatalog& catalog);

}  // namespace agentkit::tools
