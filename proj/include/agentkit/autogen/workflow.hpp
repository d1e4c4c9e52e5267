// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "agentkit/autogen/library.hpp"
#include "agentkit/autogen/synthesis.hpp"
#include "agentkit/config/agent_config.hpp"
#include "agentkit/llm/gateway.hpp"

namespace agentkit::autogen {

struct RequirementSpec {
  std::string objective;
  std::vector<std::string> required_capabilities;
  std::vector<std::string> env_constraints;
  std::vector<std::string> open_questions;

  bool operator==(const RequirementSpec&) const = default;
};

Json to_json(const RequirementSpec& s);
/// Throws std::invalid_argument on a missing/empty objective or mistyped lists.
RequirementSpec requirement_spec_from_json(const Json& j);

struct GenerationReport {
  std::string mode;
  std::string description;
  /// Per-stage artifacts: {"stage", "name", "artifact"}.
  Json stages = Json::array();
  bool config_valid = false;
  std::size_t tools_attempted = 0;
  std::size_t tools_passed = 0;
  std::size_t validation_bounces = 0;
  std::string config_yaml;

  Json to_json() const;
};

/// Stage 1: one model call turning a description into a RequirementSpec; an
/// unusable reply is retried once. Throws std::invalid_argument for an empty
/// description and GenerationError("clarify") after the retry fails.
RequirementSpec clarify(const std::string& description, llm::Gateway& gw);

struct WorkflowOptions {
  /// Library hits considered per capability.
  std::size_t retrieve_k = 3;
  SynthesisOptions synthesis;
};

/// clarify -> retrieve tools per capability and synthesize the uncovered ones
/// -> write instructions -> assemble and validate the config. A capability is
/// covered when a retrieved tool's name or tags share a token with it.
/// Synthesized tools are added to `lib`. Throws GenerationError naming the failing stage.
std::pair<config::AgentConfig, GenerationReport> generate_workflow(const std::string& description, ToolLibrary& lib,
                                                                   llm::Gateway& gw, env::Environment& sandbox,
                                                                   const WorkflowOptions& options = {});

/// "Summarize daily papers" -> "Summarize_Daily_Papers_Agent".
std::string agent_name_from(const std::string& objective);

}  // namespace agentkit::autogen
