// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <stop_token>
#include <string>
#include <utility>
#include <vector>

#include "agentkit/autogen/workflow.hpp"
#include "agentkit/runtime/episode.hpp"

namespace agentkit::autogen {

inline const std::vector<std::string>& meta_agent_tool_names() {
  static const std::vector<std::string> names{"search_tool", "create_tool", "ask_user", "create_agent_config"};
  return names;
}

/// The conversation channel of one meta-agent run.
class DialogueSession {
 public:
  virtual ~DialogueSession() = default;
  /// The user's initial request.
  virtual std::string request() const = 0;
  /// Emits an ask_user event and blocks until the user answers.
  virtual std::string ask(const std::string& question) = 0;
  /// Receives assistant_delta, tool_event, config_preview, done and failed events.
  virtual void emit(const Json& event) { (void)event; }
};

/// Answers questions from a fixed list and records every event.
class ScriptedDialogue : public DialogueSession {
 public:
  ScriptedDialogue(std::string request, std::vector<std::string> answers);

  std::string request() const override { return request_; }
  std::string ask(const std::string& question) override;
  void emit(const Json& event) override;

  std::vector<std::string> questions() const;
  std::vector<Json> events() const;

 private:
  std::string request_;
  mutable std::mutex mu_;
  std::deque<std::string> answers_;
  std::vector<std::string> questions_;
  std::vector<Json> events_;
};

struct MetaAgentOptions {
  int max_turns = 24;
  /// ask_user waits on a person, so tool and step budgets are generous.
  config::TimeoutSpec timeouts{3600, 3600, 7200};
  double temperature = 0.2;
  SynthesisOptions synthesis;
  std::stop_token cancel;
};

/// Runs the architect agent whose registry holds exactly search_tool,
/// create_tool, ask_user and create_agent_config. A config that fails
/// validation goes back to the model as a tool error; the run ends once a
/// valid config is accepted. Throws GenerationError("no_config") otherwise.
std::pair<config::AgentConfig, GenerationReport> run_meta_agent(const std::shared_ptr<DialogueSession>& session,
                                                                const std::shared_ptr<ToolLibrary>& lib,
                                                                const std::shared_ptr<llm::Gateway>& gw,
                                                                const std::shared_ptr<env::Environment>& sandbox,
                                                                const MetaAgentOptions& options = {});

}  // namespace agentkit::autogen
