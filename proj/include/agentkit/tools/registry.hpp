// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "agentkit/tools/tool.hpp"

namespace agentkit::tools {

/// The tools one episode may call, in registration order.
class ToolRegistry {
 public:
  /// Throws BindingError if the name is taken or the parameter schema is malformed.
  void add(ToolDef def, const std::string& toolkit);

  const ToolDef* find(const std::string& name) const;
  std::string toolkit_of(const std::string& name) const;
  std::vector<std::string> names() const;
  std::vector<llm::ToolDeclaration> declarations() const;
  std::size_t size() const { return order_.size(); }

  /// Per-tool ceiling applied on top of each call's budget.
  void set_tool_timeout(double tool_s) { tool_s_ = tool_s; }
  double tool_timeout() const { return tool_s_; }

  /// Parses the model's raw argument text, validates it against the tool's
  /// schema and runs the handler within min(budget_s, tool timeout).
  /// Never throws: every outcome is a ToolResult carrying call.id.
  ToolResult invoke(const llm::ToolCallRecord& call, double budget_s) const;
  ToolResult invoke(const ToolCall& call, double budget_s) const;

 private:
  struct Entry {
    std::shared_ptr<const ToolDef> def;
    std::string toolkit;
  };
  ToolResult run(const Entry& e, const std::string& id, const Json& args, double budget_s) const;

  std::vector<std::string> order_;
  std::map<std::string, Entry> entries_;
  double tool_s_ = 30;
};

}  // namespace agentkit::tools
