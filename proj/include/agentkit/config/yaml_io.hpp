// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "agentkit/config/agent_config.hpp"

namespace agentkit::config {

struct RegistrySnapshot;

/// Parses the YAML agent schema and fills documented defaults.
///
/// Top-level keys are agent, env, context_manager, toolkits, sampling and
/// timeouts; anything else is a Schema error. Cloud env aliases (e2b,
/// browser) resolve to `sandbox` and append a warning.
AgentConfig parse_config(std::string_view yaml_text, std::vector<std::string>* warnings = nullptr);

/// Canonical YAML: fixed key order, 2-space indent, defaults omitted.
/// Throws ConfigError(InvalidConfig) when `cfg` fails structural validation.
std::string emit_config(const AgentConfig& cfg);

/// Same layout as emit_config without the validation gate.
std::string emit_config_unchecked(const AgentConfig& cfg);

/// Short stable hash of the canonical emission.
std::string config_fingerprint(const AgentConfig& cfg);

}  // namespace agentkit::config
