// SPDX-License-Identifier: Apache-2.0
#include "agentkit/runtime/context.hpp"

#include <fmt/format.h>

namespace agentkit::runtime {
namespace {

/// Index ranges [begin, end) of step groups in the window.
std::vector<std::pair<std::size_t, std::size_t>> groups_of(const std::vector<llm::Message>& w) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < w.size()) {
    std::size_t j = i + 1;
    if (w[i].role == llm::Role::assistant)
      while (j < w.size() && w[j].role == llm::Role::tool) ++j;
    out.emplace_back(i, j);
    i = j;
  }
  return out;
}

std::int64_t tokens_of(const std::vector<llm::Message>& msgs) {
  std::int64_t n = 0;
  for (const auto& m : msgs) n += llm::count_message_tokens(m);
  return n;
}

bool is_placeholder(const std::string& s) { return s.rfind("[pruned tool output: ", 0) == 0; }

}  // namespace

std::string pruned_placeholder(std::size_t bytes) { return fmt::format("[pruned tool output: {} bytes]", bytes); }

std::vector<llm::Message> ContextState::render() const {
  std::vector<llm::Message> out;
  std::string sys = system_prompt;
  if (!injected_experiences.empty()) sys += "\n\n" + injected_experiences;
  out.push_back(llm::Message::system(sys));
  out.push_back(llm::Message::user(task_message));
  out.insert(out.end(), window.begin(), window.end());
  return out;
}

std::int64_t ContextState::estimated_tokens() const { return tokens_of(render()); }

ContextState initial_context(const std::string& instructions, const std::string& task, const config::CtxSpec& policy) {
  ContextState s;
  s.system_prompt = instructions;
  s.task_message = task;
  s.token_budget = policy.config.value("token_budget", kDefaultTokenBudget);
  return s;
}

ContextState manage_context(const ContextState& state, const config::CtxSpec& policy) {
  if (policy.name != "base" && policy.name != "pruning") {
    throw std::invalid_argument("unknown context manager '" + policy.name + "'");
  }
  if (state.estimated_tokens() <= state.token_budget) return state;

  ContextState s = state;
  ContextState protected_only = state;
  protected_only.window.clear();
  if (protected_only.estimated_tokens() > s.token_budget) {
    throw BudgetImpossible(fmt::format("system prompt and task need {} tokens, budget is {}",
                                       protected_only.estimated_tokens(), s.token_budget));
  }

  if (policy.name == "pruning") {
    const int keep_last = policy.config.value("keep_last", kDefaultKeepLast);
    auto groups = groups_of(s.window);
    const std::size_t stale = groups.size() > static_cast<std::size_t>(std::max(0, keep_last))
                                  ? groups.size() - static_cast<std::size_t>(std::max(0, keep_last))
                                  : 0;
    for (std::size_t g = 0; g < stale; ++g) {
      for (std::size_t i = groups[g].first; i < groups[g].second; ++i) {
        auto& m = s.window[i];
        if (m.role != llm::Role::tool || is_placeholder(m.content)) continue;
        m.content = pruned_placeholder(m.content.size());
        ++s.pruned_count;
      }
    }
  }

  while (!s.window.empty() && s.estimated_tokens() > s.token_budget) {
    auto groups = groups_of(s.window);
    const auto [b, e] = groups.front();
    s.window.erase(s.window.begin() + static_cast<std::ptrdiff_t>(b), s.window.begin() + static_cast<std::ptrdiff_t>(e));
    s.pruned_count += e - b;
  }
  return s;
}

std::string render_experiences(const std::vector<std::string>& entries) {
  if (entries.empty()) return {};
  std::string out = kExperienceHeader;
  for (std::size_t i = 0; i < entries.size(); ++i) out += fmt::format("\n{}. {}", i + 1, entries[i]);
  return out;
}

ContextState inject_experiences(const ContextState& state, const std::vector<std::string>& entries) {
  if (entries.empty()) return state;
  ContextState s = state;
  s.injected_experiences = render_experiences(entries);
  return s;
}

}  // namespace agentkit::runtime
