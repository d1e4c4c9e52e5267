// SPDX-License-Identifier: Apache-2.0
#include "agentkit/config/validate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <regex>

#include "agentkit/common/text.hpp"
#include "agentkit/config/yaml_io.hpp"

namespace agentkit::config {

const char* to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::SyntaxError: return "SyntaxError";
    case FindingKind::SchemaError: return "SchemaError";
    case FindingKind::InvalidName: return "InvalidName";
    case FindingKind::EmptyInstructions: return "EmptyInstructions";
    case FindingKind::InvalidSampling: return "InvalidSampling";
    case FindingKind::TimeoutOrder: return "TimeoutOrder";
    case FindingKind::EmptyToolName: return "EmptyToolName";
    case FindingKind::DuplicateTool: return "DuplicateTool";
    case FindingKind::DuplicateToolkit: return "DuplicateToolkit";
    case FindingKind::UnknownEnv: return "UnknownEnv";
    case FindingKind::UnknownContextManager: return "UnknownContextManager";
    case FindingKind::UnknownToolkit: return "UnknownToolkit";
    case FindingKind::UnknownTool: return "UnknownTool";
  }
  return "Unknown";
}

Json ValidationReport::to_json() const {
  Json out{{"valid", valid}, {"findings", Json::array()}};
  for (const auto& f : findings) {
    Json j{{"kind", to_string(f.kind)}, {"path", f.path}, {"message", f.message}};
    if (f.suggestion) j["suggestion"] = *f.suggestion;
    out["findings"].push_back(std::move(j));
  }
  return out;
}

namespace {

std::optional<std::string> nearest(const std::string& name, const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_distance = 0;
  for (const auto& c : candidates) {
    auto d = text::edit_distance(text::to_lower(name), text::to_lower(c));
    if (!best || d < best_distance) {
      best = c;
      best_distance = d;
    }
  }
  if (best && best_distance <= std::max<std::size_t>(2, name.size() / 3)) return best;
  return std::nullopt;
}

template <class Set>
std::vector<std::string> as_vector(const Set& s) {
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<Finding> structural_findings(const AgentConfig& cfg) {
  std::vector<Finding> out;
  static const std::regex kName(R"([A-Za-z0-9_-]+)");
  if (!std::regex_match(cfg.name, kName)) {
    out.push_back({FindingKind::InvalidName, "agent.name",
                   fmt::format("name '{}' must be nonempty and match [A-Za-z0-9_-]+", cfg.name), std::nullopt});
  }
  if (text::trim(cfg.instructions).empty()) {
    out.push_back({FindingKind::EmptyInstructions, "agent.instructions", "instructions are empty", std::nullopt});
  }
  const auto& s = cfg.sampling;
  if (!(s.temperature >= 0.0 && s.temperature <= 2.0)) {
    out.push_back({FindingKind::InvalidSampling, "sampling.temperature",
                   fmt::format("temperature {} outside [0, 2]", s.temperature), std::nullopt});
  }
  if (s.max_turns <= 0) {
    out.push_back({FindingKind::InvalidSampling, "sampling.max_turns", "max_turns must be positive", std::nullopt});
  }
  if (s.max_tokens <= 0) {
    out.push_back({FindingKind::InvalidSampling, "sampling.max_tokens", "max_tokens must be positive", std::nullopt});
  }
  const auto& t = cfg.timeouts;
  if (!(t.tool_s > 0 && t.tool_s <= t.step_s && t.step_s <= t.episode_s)) {
    out.push_back({FindingKind::TimeoutOrder, "timeouts",
                   fmt::format("expected 0 < tool_s <= step_s <= episode_s, got tool_s={} step_s={} episode_s={}",
                               t.tool_s, t.step_s, t.episode_s),
                   std::nullopt});
  }
  std::set<std::string> toolkit_names;
  for (const auto& [name, act] : cfg.toolkits) {
    const auto path = "toolkits." + name;
    if (!toolkit_names.insert(name).second) {
      out.push_back({FindingKind::DuplicateToolkit, path, "toolkit listed twice", std::nullopt});
    }
    std::set<std::string> tools;
    for (std::size_t i = 0; i < act.activated_tools.size(); ++i) {
      const auto& tool = act.activated_tools[i];
      const auto tool_path = fmt::format("{}.activated_tools[{}]", path, i);
      if (text::trim(tool).empty()) {
        out.push_back({FindingKind::EmptyToolName, tool_path, "tool name is empty", std::nullopt});
      } else if (!tools.insert(tool).second) {
        out.push_back({FindingKind::DuplicateTool, tool_path, "tool '" + tool + "' activated twice", std::nullopt});
      }
    }
  }
  return out;
}

ValidationReport validate_config(const AgentConfig& cfg, const RegistrySnapshot& registries) {
  ValidationReport report;
  report.findings = structural_findings(cfg);
  if (!registries.env_backends.count(cfg.env.name)) {
    report.findings.push_back({FindingKind::UnknownEnv, "env.name", "unknown env backend '" + cfg.env.name + "'",
                               nearest(cfg.env.name, as_vector(registries.env_backends))});
  }
  if (!registries.context_managers.count(cfg.context_manager.name)) {
    report.findings.push_back({FindingKind::UnknownContextManager, "context_manager.name",
                               "unknown context manager '" + cfg.context_manager.name + "'",
                               nearest(cfg.context_manager.name, as_vector(registries.context_managers))});
  }
  std::vector<std::string> toolkit_names;
  for (const auto& [name, _] : registries.toolkits) toolkit_names.push_back(name);
  for (const auto& [name, act] : cfg.toolkits) {
    auto it = registries.toolkits.find(name);
    if (it == registries.toolkits.end()) {
      report.findings.push_back({FindingKind::UnknownToolkit, "toolkits." + name, "unknown toolkit '" + name + "'",
                                 nearest(name, toolkit_names)});
      continue;
    }
    for (std::size_t i = 0; i < act.activated_tools.size(); ++i) {
      const auto& tool = act.activated_tools[i];
      if (tool.empty() || std::find(it->second.begin(), it->second.end(), tool) != it->second.end()) continue;
      report.findings.push_back({FindingKind::UnknownTool, fmt::format("toolkits.{}.activated_tools[{}]", name, i),
                                 fmt::format("toolkit '{}' has no tool '{}'", name, tool),
                                 nearest(tool, it->second)});
    }
  }
  report.valid = report.findings.empty();
  return report;
}

ValidationReport validate_config_text(std::string_view yaml_text, const RegistrySnapshot& registries) {
  try {
    return validate_config(parse_config(yaml_text), registries);
  } catch (const ConfigError& e) {
    ValidationReport report;
    report.valid = false;
    FindingKind kind = FindingKind::SchemaError;
    if (e.kind() == ConfigErrorKind::Syntax) kind = FindingKind::SyntaxError;
    if (e.kind() == ConfigErrorKind::UnknownComponent) {
      kind = e.path() == "env.name" ? FindingKind::UnknownEnv : FindingKind::UnknownContextManager;
    }
    auto path = e.path();
    if (path.empty()) path = e.line() > 0 ? fmt::format("<document>:{}", e.line()) : "<document>";
    report.findings.push_back({kind, path, e.detail(), std::nullopt});
    return report;
  }
}

}  // namespace agentkit::config
