// SPDX-License-Identifier: Apache-2.0
#include "agentkit/runtime/episode.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <map>

#include "agentkit/common/deadline.hpp"
#include "agentkit/common/text.hpp"
#include "agentkit/config/yaml_io.hpp"
#include "agentkit/runtime/agent_tool.hpp"

namespace agentkit::runtime {
namespace {

std::string new_episode_id() {
  static std::atomic<unsigned long long> counter{0};
  return env::new_session_id("ep") + "-" + std::to_string(++counter);
}

Json calls_json(const std::vector<llm::ToolCallRecord>& calls) {
  Json out = Json::array();
  for (const auto& c : calls) out.push_back(Json{{"id", c.id}, {"name", c.name}, {"arguments", c.arguments}});
  return out;
}

struct DepthScope {
  int saved;
  explicit DepthScope(int d) : saved(detail::binding_depth()) { detail::binding_depth() = d; }
  ~DepthScope() { detail::binding_depth() = saved; }
};

}  // namespace

namespace detail {
int& binding_depth() {
  thread_local int depth = 0;
  return depth;
}
}  // namespace detail

std::string render_tool_message(const tools::ToolResult& r) {
  if (r.status == tools::ToolStatus::ok) return r.content;
  return fmt::format("[{}] {}", tools::to_string(r.status), r.content);
}

Trajectory run_episode(const config::AgentConfig& cfg, const std::string& task, const RuntimeDeps& deps) {
  Trajectory traj;
  traj.episode_id = new_episode_id();
  traj.task = task;
  traj.config_fingerprint = config::config_fingerprint(cfg);
  const auto start = SteadyClock::now();
  const auto episode_deadline = start + to_millis(cfg.timeouts.episode_s);

  auto record = [&](Turn t) {
    traj.turns.push_back(std::move(t));
    if (deps.on_turn) {
      try {
        deps.on_turn(traj.turns.back());
      } catch (const std::exception& e) {
        spdlog::warn("turn observer failed: {}", e.what());
      }
    }
  };
  auto end = [&](Termination term, std::string error = {}) {
    traj.termination = term;
    traj.error = std::move(error);
    traj.wall_time_ms = elapsed_ms(start);
    return traj;
  };

  if (!deps.gateway) return end(Termination::fatal_error, "runtime has no gateway");

  std::shared_ptr<env::Environment> env;
  tools::ToolRegistry registry;
  try {
    env::EnvOptions opts = deps.env_options;
    opts.max_timeout_s = cfg.timeouts.tool_s;
    env = deps.env_factory ? deps.env_factory(cfg.env, opts) : std::shared_ptr<env::Environment>(env::create_env(cfg.env, opts));
    DepthScope scope(deps.depth);
    if (deps.registry_factory) {
      registry = deps.registry_factory(cfg, env);
    } else {
      auto catalog = deps.catalog ? deps.catalog : std::make_shared<const tools::ToolkitCatalog>(tools::ToolkitCatalog::builtin());
      registry = tools::build_registry(cfg, env, *catalog);
    }
    registry.set_tool_timeout(cfg.timeouts.tool_s);
  } catch (const std::exception& e) {
    if (env) env->close();
    return end(Termination::fatal_error, std::string("setup failed: ") + e.what());
  }
  struct Closer {
    std::shared_ptr<env::Environment> env;
    ~Closer() {
      if (env) env->close();
    }
  } closer{env};

  ContextState state = inject_experiences(initial_context(cfg.instructions, task, cfg.context_manager), deps.experiences);
  const auto declarations = registry.declarations();

  for (int step = 0;; ++step) {
    if (step >= cfg.sampling.max_turns) return end(Termination::max_turns);
    if (deps.cancel.stop_requested()) return end(Termination::fatal_error, "cancelled");
    const auto now = SteadyClock::now();
    if (now >= episode_deadline) return end(Termination::episode_timeout);
    const auto step_deadline = std::min(now + to_millis(cfg.timeouts.step_s), episode_deadline);

    try {
      state = manage_context(state, cfg.context_manager);
    } catch (const std::exception& e) {
      return end(Termination::fatal_error, std::string("context: ") + e.what());
    }

    llm::ChatRequest req;
    req.messages = state.render();
    req.tools = declarations;
    req.temperature = deps.temperature.value_or(cfg.sampling.temperature);
    req.max_tokens = cfg.sampling.max_tokens;
    req.seed = deps.seed;

    std::optional<llm::ChatResponse> resp;
    try {
      resp = run_until<llm::ChatResponse>(step_deadline, [gw = deps.gateway, req](std::stop_token) { return gw->complete(req); });
    } catch (const std::exception& e) {
      return end(Termination::fatal_error, std::string("model call failed: ") + e.what());
    }
    const long long model_ms = elapsed_ms(now);
    if (!resp) {
      if (step_deadline >= episode_deadline) return end(Termination::episode_timeout);
      Turn note;
      note.kind = TurnKind::system_note;
      note.payload = Json{{"event", "step_timeout"},
                          {"message", fmt::format("model call exceeded the step budget of {}s", cfg.timeouts.step_s)}};
      note.wall_time_ms = model_ms;
      record(std::move(note));
      continue;
    }

    Turn turn;
    turn.tokens_in = resp->usage.prompt_tokens;
    turn.tokens_out = resp->usage.completion_tokens;
    turn.usage_source = resp->usage.reported ? "reported" : "estimated";
    turn.wall_time_ms = model_ms;
    const std::string content = resp->content.value_or("");

    if (resp->tool_calls.empty()) {
      turn.kind = TurnKind::assistant_text;
      turn.payload = Json{{"content", content}};
      record(std::move(turn));
      traj.final_answer = content;
      return end(Termination::answered);
    }

    auto calls = resp->tool_calls;
    for (std::size_t i = 0; i < calls.size(); ++i)
      if (calls[i].id.empty()) calls[i].id = fmt::format("call_{}_{}", step, i);
    turn.kind = TurnKind::assistant_tool_calls;
    turn.payload = Json{{"content", content}, {"tool_calls", calls_json(calls)}};
    record(std::move(turn));
    state.window.push_back(llm::Message::assistant(content, calls));

    for (const auto& call : calls) {
      const double budget = std::min(cfg.timeouts.tool_s, seconds_until(step_deadline));
      auto result = registry.invoke(call, budget);
      Turn tr;
      tr.kind = TurnKind::tool_result;
      tr.payload = Json{{"id", result.id},
                        {"tool_name", call.name},
                        {"status", tools::to_string(result.status)},
                        {"content", result.content}};
      tr.wall_time_ms = result.wall_time_ms;
      record(std::move(tr));
      state.window.push_back(llm::Message::tool(call.id, render_tool_message(result)));
    }

    if (deps.finish_check) {
      if (auto answer = deps.finish_check()) {
        traj.final_answer = *answer;
        return end(Termination::answered);
      }
    }
  }
}

Trajectory mark_invalid_turns(const Trajectory& t) {
  Trajectory out = t;
  std::map<std::string, std::string> status_by_id;
  for (const auto& turn : out.turns)
    if (turn.kind == TurnKind::tool_result) status_by_id[turn.payload.value("id", "")] = turn.payload.value("status", "");

  std::vector<Json> previous;  // signatures of earlier assistant turns
  for (auto& turn : out.turns) {
    turn.valid = true;
    turn.invalid_reason.clear();
    if (!turn.is_assistant()) continue;
    Json signature;
    if (turn.kind == TurnKind::assistant_tool_calls) {
      signature = Json::array();
      for (const auto& c : turn.payload.value("tool_calls", Json::array())) {
        const auto raw = c.value("arguments", "");
        Json args;
        bool parsed = true;
        try {
          args = text::trim(raw).empty() ? Json::object() : Json::parse(raw);
        } catch (const Json::parse_error&) {
          parsed = false;
          args = raw;
        }
        signature.push_back(Json::array({c.value("name", ""), args}));
        if (!parsed && turn.valid) {
          turn.valid = false;
          turn.invalid_reason = "malformed arguments for " + c.value("name", "");
        }
        if (turn.valid && status_by_id[c.value("id", "")] == "invalid") {
          turn.valid = false;
          turn.invalid_reason = "invalid tool call to " + c.value("name", "");
        }
      }
      const auto n = previous.size();
      if (turn.valid && n >= 2 && previous[n - 1] == signature && previous[n - 2] == signature) {
        turn.valid = false;
        turn.invalid_reason = "repeats the previous two tool calls";
      }
    }
    previous.push_back(signature);
  }
  return out;
}

}  // namespace agentkit::runtime
