// SPDX-License-Identifier: Apache-2.0
#include "agentkit/runtime/agent_tool.hpp"

#include <fmt/format.h>

namespace agentkit::runtime {

tools::ToolDef agent_as_tool(const config::AgentConfig& sub_cfg, const std::string& name, const std::string& description,
                             const RuntimeDeps& parent) {
  const int depth = parent.depth + 1;
  if (depth > kMaxAgentDepth) {
    throw tools::BindingError(
        fmt::format("agent tool '{}' would nest at depth {}, the limit is {}", name, depth, kMaxAgentDepth));
  }
  tools::ToolDef def;
  def.name = name;
  def.description = description;
  def.parameters = Json{{"type", "object"},
                        {"properties", {{"task", {{"type", "string"}, {"description", "Task for the sub-agent"}}}}},
                        {"required", {"task"}},
                        {"additionalProperties", false}};
  def.source = tools::ToolSource::agent;
  def.binding = "agent:" + sub_cfg.name;
  RuntimeDeps deps = parent;
  deps.depth = depth;
  deps.on_turn = nullptr;
  deps.finish_check = nullptr;
  def.handler = [sub_cfg, deps](const Json& args, const tools::ToolContext& ctx) {
    config::AgentConfig cfg = sub_cfg;
    const double ceiling = ctx.remaining_s();
    if (ceiling <= 0) return tools::ToolOutput{tools::ToolStatus::timeout, "no time left for sub-agent"};
    cfg.timeouts.episode_s = std::min(cfg.timeouts.episode_s, ceiling);
    cfg.timeouts.step_s = std::min(cfg.timeouts.step_s, cfg.timeouts.episode_s);
    cfg.timeouts.tool_s = std::min(cfg.timeouts.tool_s, cfg.timeouts.step_s);
    RuntimeDeps run = deps;
    run.cancel = ctx.stop;
    auto traj = run_episode(cfg, args["task"].get<std::string>(), run);
    switch (traj.termination) {
      case Termination::answered: return tools::ToolOutput::ok(traj.final_answer.value_or(""));
      case Termination::episode_timeout:
        return tools::ToolOutput{tools::ToolStatus::timeout, fmt::format("sub-agent {} ran out of time", cfg.name)};
      case Termination::max_turns:
        return tools::ToolOutput::error(fmt::format("sub-agent {} hit its turn limit without answering", cfg.name));
      case Termination::fatal_error: break;
    }
    return tools::ToolOutput::error(fmt::format("sub-agent {} failed: {}", cfg.name, traj.error));
  };
  return def;
}

tools::ToolkitFactory agent_toolkit(const config::AgentConfig& sub_cfg, const std::string& name,
                                    const std::string& description, const RuntimeDeps& base) {
  tools::ToolkitFactory f;
  f.description = description;
  f.tools = {name};
  f.make = [sub_cfg, name, description, base](const Json&, const std::shared_ptr<env::Environment>&) {
    RuntimeDeps parent = base;
    parent.depth = detail::binding_depth();
    return std::vector<tools::ToolDef>{agent_as_tool(sub_cfg, name, description, parent)};
  };
  return f;
}

}  // namespace agentkit::runtime
