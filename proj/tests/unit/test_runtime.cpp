// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "agentkit/runtime/agent_tool.hpp"
#include "agentkit/runtime/context.hpp"
#include "agentkit/runtime/episode.hpp"
#include "agentkit/tools/catalog.hpp"
#include "unit/support.hpp"

using namespace agentkit;
using namespace agentkit::runtime;
using testutil::call;
using testutil::text;

namespace {

// Rendered-token oracle: ceil(bytes / 4) over content, tool names and arguments.
std::int64_t oracle_tokens(const ContextState& s) {
  auto t = [](const std::string& x) { return static_cast<std::int64_t>((x.size() + 3) / 4); };
  std::string sys = s.system_prompt;
  if (!s.injected_experiences.empty()) sys += "\n\n" + s.injected_experiences;
  std::int64_t n = t(sys) + t(s.task_message);
  for (const auto& m : s.window) {
    n += t(m.content);
    for (const auto& c : m.tool_calls) n += t(c.name) + t(c.arguments);
  }
  return n;
}

ContextState window_of_steps(int steps, std::size_t body_bytes) {
  ContextState s;
  s.system_prompt = "You are helpful.";
  s.task_message = "Find the page.";
  for (int i = 0; i < steps; ++i) {
    auto id = "c" + std::to_string(i);
    s.window.push_back(llm::Message::assistant("", {{id, "web_qa", R"({"url":"u"})"}}));
    s.window.push_back(llm::Message::tool(id, std::string(body_bytes, 'a' + i % 26)));
  }
  return s;
}

tools::ToolkitFactory hang_toolkit(double seconds) {
  tools::ToolkitFactory f;
  f.description = "sleeps";
  f.tools = {"hang"};
  f.make = [seconds](const Json&, const std::shared_ptr<env::Environment>&) {
    tools::ToolDef d;
    d.name = "hang";
    d.description = "Sleep.";
    d.handler = [seconds](const Json&, const tools::ToolContext& ctx) {
      auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
      while (std::chrono::steady_clock::now() < until && !ctx.stop.stop_requested())
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      return tools::ToolOutput::ok("woke");
    };
    return std::vector<tools::ToolDef>{d};
  };
  return f;
}

RuntimeDeps deps_with(const std::shared_ptr<llm::Gateway>& gw, std::vector<env::MockRule> rules = {},
                      std::optional<tools::ToolkitCatalog> catalog = std::nullopt) {
  auto d = testutil::deps_for(gw);
  d.env_factory = testutil::mock_env_factory(std::move(rules));
  if (catalog) d.catalog = std::make_shared<const tools::ToolkitCatalog>(*catalog);
  return d;
}

Trajectory strip_timing(Trajectory t) {
  t.episode_id.clear();
  t.wall_time_ms = 0;
  for (auto& turn : t.turns) turn.wall_time_ms = 0;
  return t;
}

Turn tool_calls_turn(const std::vector<std::tuple<std::string, std::string, std::string>>& calls) {
  Turn t;
  t.kind = TurnKind::assistant_tool_calls;
  Json arr = Json::array();
  for (const auto& [id, name, args] : calls) arr.push_back({{"id", id}, {"name", name}, {"arguments", args}});
  t.payload = Json{{"content", ""}, {"tool_calls", arr}};
  return t;
}

Turn result_turn(const std::string& id, const std::string& name, const std::string& status) {
  Turn t;
  t.kind = TurnKind::tool_result;
  t.payload = Json{{"id", id}, {"tool_name", name}, {"status", status}, {"content", "x"}};
  return t;
}

Turn answer_turn(const std::string& s) {
  Turn t;
  t.kind = TurnKind::assistant_text;
  t.payload = Json{{"content", s}};
  return t;
}

}  // namespace

// ---------------------------------------------------------------- episode loop

TEST(Episode, PythonCallThenAnswer) {
  testutil::ScriptedRig rig;
  rig.transport->push(call("c1", "execute_python_code", Json{{"code", "print(42)"}}));
  rig.transport->push(text("42"));
  auto cfg = testutil::make_config("py", {"python_executor"});
  auto rules = env::parse_mock_script(Json::array({{{"match", "print(42)"}, {"target", "code"}, {"stdout", "42\n"}}}));
  auto t = run_episode(cfg, "What is 6*7?", deps_with(rig.gateway, rules));
  EXPECT_EQ(t.termination, Termination::answered);
  ASSERT_TRUE(t.final_answer);
  EXPECT_EQ(*t.final_answer, "42");
  ASSERT_EQ(t.turns.size(), 3u);
  EXPECT_EQ(t.turns[0].kind, TurnKind::assistant_tool_calls);
  EXPECT_EQ(t.turns[1].kind, TurnKind::tool_result);
  EXPECT_EQ(t.turns[1].payload["status"], "ok");
  EXPECT_EQ(t.turns[1].payload["content"], "42\n");
  EXPECT_EQ(t.turns[2].kind, TurnKind::assistant_text);
  EXPECT_EQ(check_alternation(t), "");
  EXPECT_EQ(t.config_fingerprint, config::config_fingerprint(cfg));

  // the second request carries the tool reply
  auto reqs = rig.transport->requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[1].messages.back().role, llm::Role::tool);
  EXPECT_EQ(reqs[1].messages.back().content, "42\n");
  EXPECT_EQ(reqs[0].tools.size(), 1u);
}

TEST(Episode, AlwaysCallingStopsAtMaxTurns) {
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>(
      [](const llm::ChatRequest& r) { return call("", "calculate", Json{{"expression", std::to_string(r.messages.size())}}); }));
  auto cfg = testutil::make_config("loop", {"math_eval"});
  cfg.sampling.max_turns = 4;
  auto t = run_episode(cfg, "loop forever", deps_with(gw));
  EXPECT_EQ(t.termination, Termination::max_turns);
  EXPECT_EQ(t.turns.size(), 8u);
  EXPECT_FALSE(t.final_answer);
  EXPECT_EQ(check_alternation(t), "");
  EXPECT_EQ(t.tool_call_count(), 4u);
}

TEST(Episode, ToolHangTimesOutAndEpisodeContinues) {
  testutil::ScriptedRig rig;
  rig.transport->push(call("h", "hang", Json::object()));
  rig.transport->push(text("gave up waiting"));
  auto catalog = tools::ToolkitCatalog::builtin();
  catalog.add("hang", hang_toolkit(2.0));
  auto cfg = testutil::make_config("h", {"hang"});
  cfg.timeouts = {1, 10, 30};
  auto t0 = std::chrono::steady_clock::now();
  auto t = run_episode(cfg, "wait", deps_with(rig.gateway, {}, catalog));
  EXPECT_EQ(t.termination, Termination::answered);
  ASSERT_EQ(t.turns.size(), 3u);
  EXPECT_EQ(t.turns[1].payload["status"], "timeout");
  EXPECT_NEAR(t.turns[1].wall_time_ms, 1000, 100);
  EXPECT_LT(testutil::seconds_since(t0), 1.5);
  auto reqs = rig.transport->requests();
  EXPECT_EQ(reqs[1].messages.back().content.rfind("[timeout] ", 0), 0u);
}

TEST(Episode, StepTimeoutIsNotedAndRetried) {
  testutil::ScriptedRig rig;
  rig.transport->push(llm::ScriptedStep(text("too slow"), std::chrono::milliseconds(3000)));
  rig.transport->push(text("fast"));
  auto cfg = testutil::make_config("s");
  cfg.timeouts = {0.5, 0.5, 10};
  auto t = run_episode(cfg, "q", deps_with(rig.gateway));
  EXPECT_EQ(t.termination, Termination::answered);
  EXPECT_EQ(t.final_answer.value_or(""), "fast");
  ASSERT_EQ(t.turns.size(), 2u);
  EXPECT_EQ(t.turns[0].kind, TurnKind::system_note);
  EXPECT_EQ(t.turns[0].payload["event"], "step_timeout");
}

TEST(Episode, HangingModelBoundedByEpisodeBudget) {
  testutil::ScriptedRig rig;
  for (int i = 0; i < 4; ++i) rig.transport->push(llm::ScriptedStep(text("late"), std::chrono::milliseconds(10000)));
  auto cfg = testutil::make_config("e");
  cfg.timeouts = {1, 1.5, 2};
  auto t0 = std::chrono::steady_clock::now();
  auto t = run_episode(cfg, "q", deps_with(rig.gateway));
  const double wall = testutil::seconds_since(t0);
  EXPECT_EQ(t.termination, Termination::episode_timeout);
  EXPECT_LE(wall, 2.2);
  EXPECT_GE(wall, 1.9);
}

TEST(Episode, HangingToolBoundedByEpisodeBudget) {
  auto gw = std::make_shared<llm::Gateway>(
      std::make_shared<llm::FunctionTransport>([](const llm::ChatRequest&) { return call("", "hang", Json::object()); }));
  auto catalog = tools::ToolkitCatalog::builtin();
  catalog.add("hang", hang_toolkit(30));
  auto cfg = testutil::make_config("e", {"hang"});
  cfg.timeouts = {1, 1, 2.5};
  auto t0 = std::chrono::steady_clock::now();
  auto t = run_episode(cfg, "q", deps_with(gw, {}, catalog));
  EXPECT_EQ(t.termination, Termination::episode_timeout);
  EXPECT_LE(testutil::seconds_since(t0), 2.75);
  EXPECT_EQ(check_alternation(t), "");
}

TEST(Episode, FailuresBecomeTerminations) {
  testutil::ScriptedRig rig;
  auto t = run_episode(testutil::make_config("x"), "q", deps_with(rig.gateway));
  EXPECT_EQ(t.termination, Termination::fatal_error);
  EXPECT_FALSE(t.error.empty());

  RuntimeDeps none;
  EXPECT_EQ(run_episode(testutil::make_config("x"), "q", none).termination, Termination::fatal_error);

  auto bad = run_episode(testutil::make_config("x", {"no_such_toolkit"}), "q", deps_with(rig.gateway));
  EXPECT_EQ(bad.termination, Termination::fatal_error);
  EXPECT_NE(bad.error.find("no_such_toolkit"), std::string::npos);
}

TEST(Episode, EnvironmentClosedOnExit) {
  testutil::ScriptedRig rig;
  rig.transport->push(text("done"));
  std::shared_ptr<env::MockEnvironment> seen;
  auto deps = deps_with(rig.gateway);
  deps.env_factory = [&seen](const config::EnvSpec&, const env::EnvOptions& o) {
    seen = std::make_shared<env::MockEnvironment>(std::vector<env::MockRule>{}, o.max_timeout_s);
    return seen;
  };
  run_episode(testutil::make_config("x"), "q", deps);
  ASSERT_TRUE(seen);
  EXPECT_EQ(seen->lifecycle(), env::Lifecycle::closed);
}

TEST(Episode, ExperiencesReachSystemPrompt) {
  testutil::ScriptedRig rig;
  rig.transport->push(text("ok"));
  auto deps = deps_with(rig.gateway);
  deps.experiences = {"Verify units.", "Cite sources."};
  run_episode(testutil::make_config("x"), "q", deps);
  auto sys = rig.transport->requests()[0].messages[0].content;
  EXPECT_NE(sys.find("## Learned Experiences\n1. Verify units.\n2. Cite sources."), std::string::npos);
}

TEST(Episode, SeedAndTemperatureOverrides) {
  testutil::ScriptedRig rig;
  rig.transport->push(text("ok"));
  auto deps = deps_with(rig.gateway);
  deps.seed = 11;
  deps.temperature = 0.9;
  run_episode(testutil::make_config("x"), "q", deps);
  auto req = rig.transport->requests()[0];
  EXPECT_EQ(req.seed, 11);
  EXPECT_DOUBLE_EQ(req.temperature, 0.9);
}

TEST(Episode, BitDeterministicWithScriptAndMockEnv) {
  auto rules = env::parse_mock_script(Json::array({{{"match", "ls"}, {"stdout", "a b\n"}}}));
  auto run_once = [&] {
    testutil::ScriptedRig rig;
    rig.transport->push(call("1", "run_command", Json{{"command", "ls"}}));
    rig.transport->push(call("2", "run_command", Json{{"command", "cat a"}}));
    rig.transport->push(text("a and b"));
    return to_json(strip_timing(run_episode(testutil::make_config("d", {"shell"}), "list", deps_with(rig.gateway, rules)))).dump();
  };
  EXPECT_EQ(run_once(), run_once());
}

TEST(Episode, FuzzedTransportKeepsAlternation) {
  const std::vector<std::string> names{"calculate", "unknown_tool", "calculate"};
  const std::vector<std::string> args{R"({"expression":"1+1"})", R"({"expr":"1"})", "{oops", R"({"expression":"1/0"})"};
  for (int episode = 0; episode < 60; ++episode) {
    auto rng = std::make_shared<std::mt19937>(episode);
    auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([rng, &names, &args](const llm::ChatRequest&) {
      if ((*rng)() % 6 == 0) return text("final");
      std::vector<llm::ToolCallRecord> calls;
      const int n = 1 + static_cast<int>((*rng)() % 3);
      for (int i = 0; i < n; ++i) {
        std::string id = ((*rng)() % 4 == 0) ? "" : "id" + std::to_string((*rng)());
        calls.push_back({id, names[(*rng)() % names.size()], args[(*rng)() % args.size()]});
      }
      return llm::ChatResponse::calls(calls);
    }));
    auto cfg = testutil::make_config("fuzz", {"math_eval"});
    cfg.sampling.max_turns = 6;
    auto t = run_episode(cfg, "fuzz", deps_with(gw));
    EXPECT_EQ(check_alternation(t), "") << "episode " << episode;
    EXPECT_NE(t.termination, Termination::fatal_error) << t.error;
    auto marked = mark_invalid_turns(t);
    for (const auto& turn : marked.turns)
      if (!turn.valid) EXPECT_TRUE(turn.is_assistant());
  }
}

TEST(Episode, SixtyFourConcurrentEpisodesShareOneGateway) {
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>(
      [](const llm::ChatRequest& r) { return text("echo " + r.messages[1].content); }, std::chrono::milliseconds(50)));
  std::vector<std::thread> threads;
  std::vector<Trajectory> out(64);
  for (int i = 0; i < 64; ++i)
    threads.emplace_back([&, i] { out[i] = run_episode(testutil::make_config("c"), "task " + std::to_string(i), deps_with(gw)); });
  for (auto& th : threads) th.join();
  for (int i = 0; i < 64; ++i) {
    EXPECT_EQ(out[i].termination, Termination::answered);
    EXPECT_EQ(out[i].final_answer.value_or(""), "echo task " + std::to_string(i));
  }
}

TEST(Episode, FinishCheckEndsEpisode) {
  testutil::ScriptedRig rig;
  rig.transport->push(call("1", "calculate", Json{{"expression", "1"}}));
  auto deps = deps_with(rig.gateway);
  deps.finish_check = [] { return std::optional<std::string>("accepted"); };
  auto t = run_episode(testutil::make_config("x", {"math_eval"}), "q", deps);
  EXPECT_EQ(t.termination, Termination::answered);
  EXPECT_EQ(t.final_answer.value_or(""), "accepted");
}

// ---------------------------------------------------------------- context

TEST(Context, IdentityUnderBudget) {
  auto s = window_of_steps(3, 40);
  s.token_budget = 10000;
  EXPECT_EQ(manage_context(s, {"pruning", Json::object()}), s);
  EXPECT_EQ(manage_context(s, {"base", Json::object()}), s);
}

TEST(Context, PruningReplacesAllButLastTwoBodies) {
  auto s = window_of_steps(10, 4000);
  s.token_budget = 4000;
  ASSERT_GT(oracle_tokens(s), s.token_budget);
  auto out = manage_context(s, {"pruning", Json::object()});
  ASSERT_EQ(out.window.size(), 20u);
  int placeholders = 0;
  for (const auto& m : out.window)
    if (m.role == llm::Role::tool && m.content == "[pruned tool output: 4000 bytes]") ++placeholders;
  EXPECT_EQ(placeholders, 8);
  EXPECT_EQ(out.window[17].content.size(), 4000u);
  EXPECT_EQ(out.window[19].content.size(), 4000u);
  EXPECT_EQ(out.pruned_count, 8u);
  EXPECT_EQ(out.system_prompt, s.system_prompt);
  EXPECT_EQ(out.task_message, s.task_message);
}

TEST(Context, PruningRespectsKeepLast) {
  auto s = window_of_steps(6, 4000);
  s.token_budget = 5000;
  auto out = manage_context(s, {"pruning", Json{{"keep_last", 1}}});
  int kept = 0;
  for (const auto& m : out.window)
    if (m.role == llm::Role::tool && m.content.size() == 4000) ++kept;
  EXPECT_EQ(kept, 1);
}

TEST(Context, BaseDropsOldestGroups) {
  auto s = window_of_steps(10, 4000);
  s.token_budget = 3500;
  auto out = manage_context(s, {"base", Json::object()});
  ASSERT_FALSE(out.window.empty());
  EXPECT_EQ(out.window.front().role, llm::Role::assistant);
  EXPECT_EQ(out.window.back().content, s.window.back().content);
  EXPECT_LE(oracle_tokens(out), 3500);
  EXPECT_EQ(out.task_message, s.task_message);
}

TEST(Context, PageContentPrunedTaskHistoryRetained) {
  auto s = window_of_steps(5, 0);
  for (auto& m : s.window)
    if (m.role == llm::Role::tool) m.content = "<html><body>" + std::string(6000, 'x') + "</body></html>";
  s.token_budget = 5000;
  auto out = manage_context(s, {"pruning", Json::object()});
  EXPECT_EQ(out.window.size(), s.window.size());
  EXPECT_EQ(out.render()[0].content, s.system_prompt);
  EXPECT_EQ(out.render()[1].content, s.task_message);
  for (std::size_t i = 0; i < out.window.size(); ++i)
    if (out.window[i].role == llm::Role::assistant) EXPECT_EQ(out.window[i], s.window[i]);
  EXPECT_EQ(out.window[1].content.rfind("[pruned tool output: ", 0), 0u);
}

TEST(Context, BudgetImpossibleAndUnknownPolicy) {
  ContextState s;
  s.system_prompt = std::string(400, 's');
  s.task_message = "t";
  s.token_budget = 50;
  EXPECT_THROW(manage_context(s, {"base", Json::object()}), BudgetImpossible);
  EXPECT_THROW(manage_context(s, {"summarize", Json::object()}), std::invalid_argument);
}

TEST(Context, RandomWindowsEndWithinBudget) {
  std::mt19937 rng(3);
  for (int iter = 0; iter < 300; ++iter) {
    auto s = window_of_steps(1 + static_cast<int>(rng() % 12), rng() % 3000);
    s.token_budget = 20 + static_cast<std::int64_t>(rng() % 6000);
    const std::string policy = rng() % 2 ? "base" : "pruning";
    if (oracle_tokens(ContextState{s.system_prompt, s.task_message, {}, 0, s.token_budget, {}}) > s.token_budget) continue;
    auto out = manage_context(s, {policy, Json{{"keep_last", static_cast<int>(rng() % 4)}}});
    EXPECT_LE(oracle_tokens(out), out.token_budget) << policy;
    EXPECT_EQ(out.estimated_tokens(), oracle_tokens(out));
    EXPECT_EQ(out.system_prompt, s.system_prompt);
    EXPECT_EQ(out.task_message, s.task_message);
    if (!out.window.empty()) EXPECT_EQ(out.window.front().role, llm::Role::assistant);
  }
}

TEST(Context, DefaultBudgetFromPolicy) {
  EXPECT_EQ(initial_context("i", "t", {"base", Json::object()}).token_budget, 24000);
  EXPECT_EQ(initial_context("i", "t", {"base", Json{{"token_budget", 500}}}).token_budget, 500);
}

TEST(Context, ExperienceInjection) {
  auto s = initial_context("Be brief.", "task", {"base", Json::object()});
  EXPECT_EQ(inject_experiences(s, {}), s);
  auto once = inject_experiences(s, {"one", "two", "three"});
  auto twice = inject_experiences(once, {"one", "two", "three"});
  EXPECT_EQ(once, twice);
  auto sys = twice.render()[0].content;
  std::size_t headers = 0;
  for (auto p = sys.find("## Learned Experiences"); p != std::string::npos; p = sys.find("## Learned Experiences", p + 1)) ++headers;
  EXPECT_EQ(headers, 1u);
  EXPECT_NE(sys.find("\n1. one\n2. two\n3. three"), std::string::npos);
  EXPECT_EQ(sys.rfind("Be brief.", 0), 0u);
}

// ---------------------------------------------------------------- invalid-turn filter

TEST(MarkInvalid, UnknownToolCallFlagsOnlyThatTurn) {
  Trajectory t;
  t.turns = {tool_calls_turn({{"a", "calculate", "{}"}}), result_turn("a", "calculate", "ok"),
             tool_calls_turn({{"b", "teleport", "{}"}}), result_turn("b", "teleport", "invalid"), answer_turn("done")};
  auto m = mark_invalid_turns(t);
  std::vector<bool> valid;
  for (const auto& turn : m.turns) valid.push_back(turn.valid);
  EXPECT_EQ(valid, (std::vector<bool>{true, true, false, true, true}));
  EXPECT_FALSE(m.turns[2].invalid_reason.empty());
}

TEST(MarkInvalid, ThirdIdenticalCallIsAnomalous) {
  Trajectory t;
  for (int i = 0; i < 3; ++i) {
    auto id = "c" + std::to_string(i);
    t.turns.push_back(tool_calls_turn({{id, "search", R"({"query":"x"})"}}));
    t.turns.push_back(result_turn(id, "search", "ok"));
  }
  auto m = mark_invalid_turns(t);
  EXPECT_TRUE(m.turns[0].valid);
  EXPECT_TRUE(m.turns[2].valid);
  EXPECT_FALSE(m.turns[4].valid);
}

TEST(MarkInvalid, RetryAfterOneDuplicateIsAllowed) {
  Trajectory t;
  t.turns = {tool_calls_turn({{"1", "search", R"({"query":"x"})"}}), result_turn("1", "search", "ok"),
             tool_calls_turn({{"2", "search", R"({"query":"y"})"}}), result_turn("2", "search", "ok"),
             tool_calls_turn({{"3", "search", R"({"query":"x"})"}}), result_turn("3", "search", "ok")};
  for (const auto& turn : mark_invalid_turns(t).turns) EXPECT_TRUE(turn.valid);
}

TEST(MarkInvalid, MalformedArgumentsFlagged) {
  Trajectory t;
  t.turns = {tool_calls_turn({{"1", "search", "{broken"}}), result_turn("1", "search", "invalid")};
  auto m = mark_invalid_turns(t);
  EXPECT_FALSE(m.turns[0].valid);
  EXPECT_NE(m.turns[0].invalid_reason.find("malformed"), std::string::npos);
}

TEST(MarkInvalid, CleanTrajectoryAllValidAndFlagsReset) {
  Trajectory t;
  t.turns = {tool_calls_turn({{"1", "search", R"({"query":"x"})"}}), result_turn("1", "search", "error"), answer_turn("y")};
  for (auto& turn : t.turns) turn.valid = false;
  for (const auto& turn : mark_invalid_turns(t).turns) EXPECT_TRUE(turn.valid);
}

// ---------------------------------------------------------------- trajectory

TEST(Trajectory, JsonRoundTrip) {
  testutil::ScriptedRig rig;
  rig.transport->push(call("c1", "calculate", Json{{"expression", "2+2"}}));
  rig.transport->push(text("4"));
  auto t = run_episode(testutil::make_config("r", {"math_eval"}), "2+2?", deps_with(rig.gateway));
  t.reward = 1.0;
  auto j = to_json(t);
  EXPECT_EQ(trajectory_from_json(j), t);
  EXPECT_EQ(j["termination"], "answered");
  EXPECT_EQ(j["turns"][1]["kind"], "tool_result");
  EXPECT_EQ(j["turns"][0]["usage_source"], "estimated");
}

TEST(Trajectory, AlternationViolationsDetected) {
  Trajectory orphan;
  orphan.turns = {result_turn("x", "t", "ok")};
  EXPECT_NE(check_alternation(orphan), "");
  Trajectory mismatch;
  mismatch.turns = {tool_calls_turn({{"a", "t", "{}"}}), result_turn("b", "t", "ok")};
  EXPECT_NE(check_alternation(mismatch), "");
  Trajectory missing;
  missing.turns = {tool_calls_turn({{"a", "t", "{}"}, {"b", "t", "{}"}}), result_turn("a", "t", "ok"), answer_turn("x")};
  EXPECT_NE(check_alternation(missing), "");
}

// ---------------------------------------------------------------- agent as tool

TEST(AgentTool, SubAgentAnswerBecomesToolOutput) {
  testutil::ScriptedRig sub;
  sub.transport->push(text("done"));
  auto def = agent_as_tool(testutil::make_config("sub"), "helper", "Delegate.", deps_with(sub.gateway));
  EXPECT_EQ(def.source, tools::ToolSource::agent);
  tools::ToolRegistry reg;
  reg.add(def, "agents");
  auto r = reg.invoke(tools::ToolCall{"1", "helper", Json{{"task", "do it"}}}, 10);
  EXPECT_EQ(r.status, tools::ToolStatus::ok);
  EXPECT_EQ(r.content, "done");
  EXPECT_EQ(sub.transport->requests()[0].messages[1].content, "do it");
}

TEST(AgentTool, DepthCap) {
  testutil::ScriptedRig rig;
  auto deps = deps_with(rig.gateway);
  deps.depth = 2;
  EXPECT_NO_THROW(agent_as_tool(testutil::make_config("s"), "a", "d", deps));
  deps.depth = 3;
  EXPECT_THROW(agent_as_tool(testutil::make_config("s"), "a", "d", deps), tools::BindingError);
}

TEST(AgentTool, NestedChainFailsAtDepthFour) {
  // each level delegates to the tool it was given and relays the reply upward
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([](const llm::ChatRequest& r) {
    if (r.messages.back().role == llm::Role::tool) return text(r.messages.back().content);
    if (r.tools.empty()) return text("leaf");
    return call("c", r.tools[0].name, Json{{"task", "go"}});
  }));
  auto base = testutil::deps_for(gw);
  base.env_factory = testutil::mock_env_factory();
  auto catalog = std::make_shared<tools::ToolkitCatalog>(tools::ToolkitCatalog::builtin());
  base.catalog = catalog;
  for (int k = 1; k <= 4; ++k) {
    auto sub = testutil::make_config("level" + std::to_string(k));
    if (k < 4) sub.toolkits.push_back({"agent" + std::to_string(k + 1), {}});
    catalog->add("agent" + std::to_string(k), agent_toolkit(sub, "agent" + std::to_string(k), "delegate", base));
  }
  auto three = testutil::make_config("level0", {"agent2"});
  auto ok = run_episode(three, "go", base);
  EXPECT_EQ(ok.final_answer.value_or(""), "leaf");

  auto four = run_episode(testutil::make_config("level0", {"agent1"}), "go", base);
  EXPECT_EQ(four.termination, Termination::answered);
  EXPECT_NE(four.final_answer.value_or("").find("depth 4"), std::string::npos) << four.final_answer.value_or("");
}

TEST(AgentTool, SubEpisodeBoundedByCallerBudget) {
  testutil::ScriptedRig sub;
  sub.transport->push(llm::ScriptedStep(text("late"), std::chrono::milliseconds(5000)));
  auto def = agent_as_tool(testutil::make_config("slow"), "slow", "d", deps_with(sub.gateway));
  tools::ToolRegistry reg;
  reg.add(def, "agents");
  auto t0 = std::chrono::steady_clock::now();
  auto r = reg.invoke(tools::ToolCall{"1", "slow", Json{{"task", "x"}}}, 0.5);
  EXPECT_EQ(r.status, tools::ToolStatus::timeout);
  EXPECT_LT(testutil::seconds_since(t0), 1.0);
}
