// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agentkit/common/error.hpp"
#include "agentkit/common/json.hpp"

namespace agentkit::config {

/// Names an environment backend or context manager plus its opaque options.
struct ComponentSpec {
  std::string name;
  Json config = Json::object();

  bool operator==(const ComponentSpec&) const = default;
};

using EnvSpec = ComponentSpec;
using CtxSpec = ComponentSpec;

/// Which tools of a toolkit are exposed. An empty list activates every tool.
struct ToolkitActivation {
  std::vector<std::string> activated_tools;
  Json config = Json::object();

  bool operator==(const ToolkitActivation&) const = default;
};

struct SamplingParams {
  double temperature = 0.7;
  int max_turns = 32;
  int max_tokens = 4096;

  bool operator==(const SamplingParams&) const = default;
};

/// Nested budgets in seconds: 0 < tool_s <= step_s <= episode_s.
struct TimeoutSpec {
  double tool_s = 30;
  double step_s = 120;
  double episode_s = 600;

  bool operator==(const TimeoutSpec&) const = default;
};

struct AgentConfig {
  std::string name;
  std::string instructions;
  EnvSpec env{"mock", Json::object()};
  CtxSpec context_manager{"base", Json::object()};
  /// Document order is preserved; keys are unique.
  std::vector<std::pair<std::string, ToolkitActivation>> toolkits;
  SamplingParams sampling;
  TimeoutSpec timeouts;

  bool operator==(const AgentConfig&) const = default;

  const ToolkitActivation* find_toolkit(const std::string& toolkit) const;
};

inline const std::set<std::string>& builtin_env_backends() {
  static const std::set<std::string> names{"local_shell", "sandbox", "mock"};
  return names;
}

inline const std::set<std::string>& builtin_context_managers() {
  static const std::set<std::string> names{"base", "pruning"};
  return names;
}

/// Cloud backend names that load as the local sandbox.
inline const std::map<std::string, std::string>& env_aliases() {
  static const std::map<std::string, std::string> aliases{
      {"e2b", "sandbox"}, {"browser", "sandbox"}, {"playwright", "sandbox"}};
  return aliases;
}

enum class ConfigErrorKind { Syntax, Schema, UnknownComponent, InvalidConfig };

const char* to_string(ConfigErrorKind kind);

/// Parse/emit failure with a dotted field path into the input document.
class ConfigError : public Error {
 public:
  ConfigError(ConfigErrorKind kind, std::string path, const std::string& message, int line = -1);

  ConfigErrorKind kind() const { return kind_; }
  const std::string& path() const { return path_; }
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  ConfigErrorKind kind_;
  std::string path_;
  std::string detail_;
  int line_;
};

}  // namespace agentkit::config
