// SPDX-License-Identifier: Apache-2.0
#include "agentkit/tools/registry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

#include "agentkit/tools/schema.hpp"

namespace agentkit::tools {

void ToolRegistry::add(ToolDef def, const std::string& toolkit) {
  if (def.name.empty()) throw BindingError("tool in toolkit '" + toolkit + "' has an empty name");
  if (auto it = entries_.find(def.name); it != entries_.end()) {
    throw BindingError(fmt::format("tool '{}' is provided by both toolkit '{}' and toolkit '{}'", def.name,
                                   it->second.toolkit, toolkit));
  }
  if (auto problem = check_parameter_schema(def.parameters); !problem.empty()) {
    throw BindingError(fmt::format("tool '{}' of toolkit '{}': {}", def.name, toolkit, problem));
  }
  if (!def.handler) throw BindingError(fmt::format("tool '{}' of toolkit '{}' has no handler", def.name, toolkit));
  order_.push_back(def.name);
  auto name = def.name;
  entries_.emplace(name, Entry{std::make_shared<const ToolDef>(std::move(def)), toolkit});
}

const ToolDef* ToolRegistry::find(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : it->second.def.get();
}

std::string ToolRegistry::toolkit_of(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? std::string() : it->second.toolkit;
}

std::vector<std::string> ToolRegistry::names() const { return order_; }

std::vector<llm::ToolDeclaration> ToolRegistry::declarations() const {
  std::vector<llm::ToolDeclaration> out;
  for (const auto& n : order_) out.push_back(entries_.at(n).def->declaration());
  return out;
}

ToolResult ToolRegistry::invoke(const llm::ToolCallRecord& call, double budget_s) const {
  auto it = entries_.find(call.name);
  if (it == entries_.end()) return {call.id, ToolStatus::invalid, "unknown tool: " + call.name, 0};
  Json args;
  const auto text = call.arguments;
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    args = Json::object();
  } else {
    try {
      args = Json::parse(text);
    } catch (const Json::parse_error& e) {
      return {call.id, ToolStatus::invalid, std::string("malformed arguments: ") + e.what(), 0};
    }
  }
  if (!args.is_object()) {
    return {call.id, ToolStatus::invalid, std::string("malformed arguments: expected a JSON object, got ") + args.type_name(), 0};
  }
  return run(it->second, call.id, args, budget_s);
}

ToolResult ToolRegistry::invoke(const ToolCall& call, double budget_s) const {
  auto it = entries_.find(call.tool_name);
  if (it == entries_.end()) return {call.id, ToolStatus::invalid, "unknown tool: " + call.tool_name, 0};
  if (!call.arguments.is_object()) {
    return {call.id, ToolStatus::invalid, "malformed arguments: expected a JSON object", 0};
  }
  return run(it->second, call.id, call.arguments, budget_s);
}

ToolResult ToolRegistry::run(const Entry& e, const std::string& id, const Json& args, double budget_s) const {
  auto violations = validate_instance(e.def->parameters, args);
  if (!violations.empty()) {
    std::string msg = "schema mismatch";
    for (const auto& v : violations) msg += fmt::format("\n  at '{}': {}", v.path.empty() ? "/" : v.path, v.message);
    return {id, ToolStatus::invalid, msg, 0};
  }
  const double budget = std::min(budget_s, tool_s_);
  if (!(budget > 0)) return {id, ToolStatus::timeout, "no time budget left for tool " + e.def->name, 0};

  const auto start = SteadyClock::now();
  const auto deadline = start + to_millis(budget);
  auto def = e.def;
  ToolResult result{id, ToolStatus::ok, {}, 0};
  try {
    auto out = run_until<ToolOutput>(deadline, [def, args, deadline, budget](std::stop_token stop) {
      return def->handler(args, ToolContext{stop, deadline, budget});
    });
    if (out) {
      result.status = out->status;
      result.content = std::move(out->content);
    } else {
      result.status = ToolStatus::timeout;
      result.content = fmt::format("tool {} timed out after {:.3g}s", def->name, budget);
    }
  } catch (const std::exception& ex) {
    result.status = ToolStatus::error;
    result.content = fmt::format("tool {} failed: {}", def->name, ex.what());
  } catch (...) {
    result.status = ToolStatus::error;
    result.content = fmt::format("tool {} failed", def->name);
  }
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

}  // namespace agentkit::tools
