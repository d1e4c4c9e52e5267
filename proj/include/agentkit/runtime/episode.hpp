// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "agentkit/config/agent_config.hpp"
#include "agentkit/env/environment.hpp"
#include "agentkit/llm/gateway.hpp"
#include "agentkit/runtime/context.hpp"
#include "agentkit/runtime/trajectory.hpp"
#include "agentkit/tools/catalog.hpp"

namespace agentkit::runtime {

using EnvFactory = std::function<std::shared_ptr<env::Environment>(const config::EnvSpec&, const env::EnvOptions&)>;
using RegistryFactory =
    std::function<tools::ToolRegistry(const config::AgentConfig&, const std::shared_ptr<env::Environment>&)>;

/// Everything an episode needs besides its config and task. Cheap to copy.
struct RuntimeDeps {
  std::shared_ptr<llm::Gateway> gateway;
  /// Defaults to the builtin catalog.
  std::shared_ptr<const tools::ToolkitCatalog> catalog;
  env::EnvOptions env_options;
  /// Replaces create_env.
  EnvFactory env_factory;
  /// Replaces build_registry.
  RegistryFactory registry_factory;
  /// Experience bank entries injected into the system prompt.
  std::vector<std::string> experiences;
  /// Overrides cfg.sampling.temperature.
  std::optional<double> temperature;
  std::optional<std::int64_t> seed;
  /// Observes every recorded turn as it happens.
  std::function<void(const Turn&)> on_turn;
  /// Polled after each step; a value ends the episode as answered with that final answer.
  std::function<std::optional<std::string>()> finish_check;
  std::stop_token cancel;
  /// Agent-as-tool nesting level of this episode (0 for top level).
  int depth = 0;
};

/// The perceive-reason-act loop. At most max_turns steps; each step renders the
/// managed context, calls the model within the step budget and runs the
/// requested tools sequentially within min(tool_s, step remaining). The whole
/// episode is bounded by episode_s and the environment is closed on exit.
/// Never throws: failures become the trajectory's termination.
Trajectory run_episode(const config::AgentConfig& cfg, const std::string& task, const RuntimeDeps& deps);

/// Flags assistant turns with an invalid-status tool result, unparsable
/// arguments, or tool calls identical to both of the previous two assistant
/// turns. All other turns become valid.
Trajectory mark_invalid_turns(const Trajectory& t);

/// Text the model sees for a tool result: the content, prefixed with "[<status>] " unless ok.
std::string render_tool_message(const tools::ToolResult& r);

}  // namespace agentkit::runtime
