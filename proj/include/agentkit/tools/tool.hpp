// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>

#include "agentkit/common/deadline.hpp"
#include "agentkit/common/error.hpp"
#include "agentkit/common/json.hpp"
#include "agentkit/llm/types.hpp"

namespace agentkit::tools {

enum class ToolSource { builtin_env, builtin_pure, synthesized, remote_protocol, agent };
enum class ToolStatus { ok, error, timeout, invalid };

const char* to_string(ToolSource s);
const char* to_string(ToolStatus s);
ToolSource tool_source_from_string(const std::string& s);
ToolStatus tool_status_from_string(const std::string& s);

class ToolError : public Error {
 public:
  using Error::Error;
};
class UnknownToolkit : public ToolError {
 public:
  using ToolError::ToolError;
};
class UnknownTool : public ToolError {
 public:
  using ToolError::ToolError;
};
class BindingError : public ToolError {
 public:
  using ToolError::ToolError;
};

struct ToolCall {
  std::string id;
  std::string tool_name;
  Json arguments = Json::object();
};

struct ToolResult {
  std::string id;
  ToolStatus status = ToolStatus::ok;
  std::string content;
  long long wall_time_ms = 0;

  bool operator==(const ToolResult&) const = default;
};

Json to_json(const ToolResult& r);
ToolResult tool_result_from_json(const Json& j);

/// Per-invocation limits handed to a handler.
struct ToolContext {
  std::stop_token stop;
  TimePoint deadline;
  double budget_s = 0;

  double remaining_s() const { return seconds_until(deadline); }
};

/// What a handler reports; exceptions thrown by a handler become status=error.
struct ToolOutput {
  ToolStatus status = ToolStatus::ok;
  std::string content;

  static ToolOutput ok(std::string text) { return {ToolStatus::ok, std::move(text)}; }
  static ToolOutput error(std::string text) { return {ToolStatus::error, std::move(text)}; }
};

using ToolHandler = std::function<ToolOutput(const Json& args, const ToolContext& ctx)>;

struct ToolDef {
  std::string name;
  std::string description;
  /// JSON Schema of the argument object.
  Json parameters = Json{{"type", "object"}, {"properties", Json::object()}};
  ToolSource source = ToolSource::builtin_pure;
  /// Human-readable reference to what executes: env primitive, script path, server+tool, sub-agent.
  std::string binding;
  ToolHandler handler;
  /// Self-test record for synthesized tools.
  std::optional<Json> test_report;

  llm::ToolDeclaration declaration() const { return {name, description, parameters}; }
};

/// Structural check for a tool parameter schema: an object schema whose
/// properties are schemas and whose required list names unique strings.
/// Returns an empty string when valid, else the first problem.
std::string check_parameter_schema(const Json& schema);

}  // namespace agentkit::tools
