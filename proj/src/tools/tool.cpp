// SPDX-License-Identifier: Apache-2.0
#include "agentkit/tools/tool.hpp"

#include <set>
#include <stdexcept>

namespace agentkit::tools {

const char* to_string(ToolSource s) {
  switch (s) {
    case ToolSource::builtin_env: return "builtin_env";
    case ToolSource::builtin_pure: return "builtin_pure";
    case ToolSource::synthesized: return "synthesized";
    case ToolSource::remote_protocol: return "remote_protocol";
    case ToolSource::agent: return "agent";
  }
  return "unknown";
}

const char* to_string(ToolStatus s) {
  switch (s) {
    case ToolStatus::ok: return "ok";
    case ToolStatus::error: return "error";
    case ToolStatus::timeout: return "timeout";
    case ToolStatus::invalid: return "invalid";
  }
  return "unknown";
}

ToolSource tool_source_from_string(const std::string& s) {
  for (auto v : {ToolSource::builtin_env, ToolSource::builtin_pure, ToolSource::synthesized,
                 ToolSource::remote_protocol, ToolSource::agent})
    if (s == to_string(v)) return v;
  throw std::invalid_argument("unknown tool source: " + s);
}

ToolStatus tool_status_from_string(const std::string& s) {
  for (auto v : {ToolStatus::ok, ToolStatus::error, ToolStatus::timeout, ToolStatus::invalid})
    if (s == to_string(v)) return v;
  throw std::invalid_argument("unknown tool status: " + s);
}

Json to_json(const ToolResult& r) {
  return Json{{"id", r.id}, {"status", to_string(r.status)}, {"content", r.content}, {"wall_time_ms", r.wall_time_ms}};
}

ToolResult tool_result_from_json(const Json& j) {
  ToolResult r;
  r.id = j.at("id").get<std::string>();
  r.status = tool_status_from_string(j.at("status").get<std::string>());
  r.content = j.at("content").get<std::string>();
  r.wall_time_ms = j.value("wall_time_ms", 0LL);
  return r;
}

std::string check_parameter_schema(const Json& schema) {
  if (!schema.is_object()) return "parameters must be a JSON object";
  if (schema.value("type", std::string()) != "object") return "parameters.type must be \"object\"";
  if (schema.contains("properties")) {
    const auto& props = schema["properties"];
    if (!props.is_object()) return "parameters.properties must be an object";
    for (auto it = props.begin(); it != props.end(); ++it)
      if (!it->is_object() && !it->is_boolean()) return "parameters.properties." + it.key() + " must be a schema";
  }
  if (schema.contains("required")) {
    const auto& req = schema["required"];
    if (!req.is_array()) return "parameters.required must be a list";
    std::set<std::string> seen;
    for (const auto& r : req) {
      if (!r.is_string()) return "parameters.required entries must be strings";
      if (!seen.insert(r.get<std::string>()).second) return "parameters.required lists '" + r.get<std::string>() + "' twice";
    }
  }
  return {};
}

}  // namespace agentkit::tools
