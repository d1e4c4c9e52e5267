// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "agentkit/env/environment.hpp"

namespace agentkit::env {

enum class MockTarget { any, command, code };

/// First rule whose `match` substring occurs in the command/source wins.
/// An empty match or "*" matches everything.
struct MockRule {
  std::string match;
  MockTarget target = MockTarget::any;
  ExecResult result;
  /// Simulated run time; a delay beyond the call timeout yields the timeout sentinel.
  long long delay_ms = 0;
};

/// Parses the mock script format: a JSON list of
/// {"match", "target"?, "stdout"?, "stderr"?, "exit_code"?, "delay_ms"?}.
std::vector<MockRule> parse_mock_script(const Json& script);

/// Deterministic backend: results come from the script, wall time is the scripted delay.
class MockEnvironment : public Environment {
 public:
  MockEnvironment(std::vector<MockRule> rules, double max_timeout_s);

  std::string backend() const override { return "mock"; }

  std::size_t calls() const;

 protected:
  ExecResult do_exec_command(const std::string& command, double timeout_s) override;
  ExecResult do_exec_code(const std::string& source, double timeout_s) override;

 private:
  ExecResult respond(const std::string& input, MockTarget target, double timeout_s);

  std::vector<MockRule> rules_;
  std::size_t calls_ = 0;
};

}  // namespace agentkit::env
