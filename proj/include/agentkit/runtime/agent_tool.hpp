// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "agentkit/runtime/episode.hpp"

namespace agentkit::runtime {

inline constexpr int kMaxAgentDepth = 3;

/// A tool that runs `sub_cfg` as a nested episode on its `task` argument and
/// returns the sub-agent's final answer. The nested episode's budget is capped
/// by the calling tool's remaining time. `parent` supplies the runtime and the
/// caller's depth; throws tools::BindingError if the nested depth would exceed 3.
tools::ToolDef agent_as_tool(const config::AgentConfig& sub_cfg, const std::string& name, const std::string& description,
                             const RuntimeDeps& parent);

/// Catalog entry exposing one sub-agent tool, bound at the depth of the episode building its registry.
tools::ToolkitFactory agent_toolkit(const config::AgentConfig& sub_cfg, const std::string& name,
                                    const std::string& description, const RuntimeDeps& base);

namespace detail {
/// Depth of the episode whose registry is being built on this thread.
int& binding_depth();
}  // namespace detail

}  // namespace agentkit::runtime
