// SPDX-License-Identifier: Apache-2.0
#include "agentkit/env/mock_env.hpp"

#include <thread>

namespace agentkit::env {

std::vector<MockRule> parse_mock_script(const Json& script) {
  if (!script.is_array()) throw std::invalid_argument("mock script must be a JSON list");
  std::vector<MockRule> rules;
  for (const auto& item : script) {
    if (!item.is_object()) throw std::invalid_argument("mock rule must be an object");
    MockRule r;
    r.match = item.value("match", std::string());
    auto target = item.value("target", std::string("any"));
    if (target == "any") r.target = MockTarget::any;
    else if (target == "command") r.target = MockTarget::command;
    else if (target == "code") r.target = MockTarget::code;
    else throw std::invalid_argument("mock rule target must be any|command|code, got " + target);
    r.result.stdout_text = item.value("stdout", std::string());
    r.result.stderr_text = item.value("stderr", std::string());
    r.result.exit_code = item.value("exit_code", 0);
    r.result.stdout_bytes = r.result.stdout_text.size();
    r.result.stderr_bytes = r.result.stderr_text.size();
    r.delay_ms = item.value("delay_ms", 0LL);
    rules.push_back(std::move(r));
  }
  return rules;
}

MockEnvironment::MockEnvironment(std::vector<MockRule> rules, double max_timeout_s)
    : Environment(new_session_id("mock"), max_timeout_s), rules_(std::move(rules)) {
  mark_ready();
}

std::size_t MockEnvironment::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

ExecResult MockEnvironment::do_exec_command(const std::string& command, double timeout_s) {
  return respond(command, MockTarget::command, timeout_s);
}

ExecResult MockEnvironment::do_exec_code(const std::string& source, double timeout_s) {
  return respond(source, MockTarget::code, timeout_s);
}

ExecResult MockEnvironment::respond(const std::string& input, MockTarget target, double timeout_s) {
  const MockRule* hit = nullptr;
  {
    std::lock_guard lock(mu_);
    ++calls_;
    for (const auto& r : rules_) {
      if (r.target != MockTarget::any && r.target != target) continue;
      if (r.match.empty() || r.match == "*" || input.find(r.match) != std::string::npos) {
        hit = &r;
        break;
      }
    }
  }
  if (!hit) {
    ExecResult miss;
    miss.exit_code = 127;
    miss.stderr_text = "mock: no rule matches input";
    miss.stderr_bytes = miss.stderr_text.size();
    return miss;
  }
  const long long budget_ms = static_cast<long long>(timeout_s * 1000.0);
  if (hit->delay_ms > budget_ms) {
    std::this_thread::sleep_for(std::chrono::milliseconds(budget_ms));
    ExecResult r;
    r.exit_code = kTimeoutExitCode;
    r.wall_time_ms = budget_ms;
    return r;
  }
  if (hit->delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(hit->delay_ms));
  ExecResult r = hit->result;
  r.wall_time_ms = hit->delay_ms;
  return r;
}

}  // namespace agentkit::env
