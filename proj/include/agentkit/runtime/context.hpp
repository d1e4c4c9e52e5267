// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "agentkit/common/error.hpp"
#include "agentkit/config/agent_config.hpp"
#include "agentkit/llm/types.hpp"

namespace agentkit::runtime {

inline constexpr std::int64_t kDefaultTokenBudget = 24000;
inline constexpr int kDefaultKeepLast = 2;
inline constexpr const char* kExperienceHeader = "## Learned Experiences";

class BudgetImpossible : public Error {
 public:
  using Error::Error;
};

/// The working context of one episode. The system prompt (with any injected
/// experiences) and the task message are protected; the window holds the rest.
struct ContextState {
  std::string system_prompt;
  std::string task_message;
  std::vector<llm::Message> window;
  std::size_t pruned_count = 0;
  std::int64_t token_budget = kDefaultTokenBudget;
  /// Rendered experience block, appended to the system prompt when nonempty.
  std::string injected_experiences;

  bool operator==(const ContextState&) const = default;

  /// system, user(task), then the window.
  std::vector<llm::Message> render() const;
  std::int64_t estimated_tokens() const;
};

/// Builds the initial state; token_budget comes from ctx config "token_budget".
ContextState initial_context(const std::string& instructions, const std::string& task, const config::CtxSpec& policy);

/// `base` drops the oldest step groups (an assistant message and its tool
/// replies) until within budget. `pruning` first replaces tool bodies outside
/// the last keep_last groups with "[pruned tool output: <n> bytes]", then drops.
/// Identity when already within budget. Throws BudgetImpossible when the
/// protected messages alone exceed the budget, std::invalid_argument for an unknown policy.
ContextState manage_context(const ContextState& state, const config::CtxSpec& policy);

/// "## Learned Experiences" followed by "1. ...", one line per entry; "" for no entries.
std::string render_experiences(const std::vector<std::string>& entries);

/// Sets the experience block (replacing any previous one). Empty entries leave the state unchanged.
ContextState inject_experiences(const ContextState& state, const std::vector<std::string>& entries);

std::string pruned_placeholder(std::size_t bytes);

}  // namespace agentkit::runtime
