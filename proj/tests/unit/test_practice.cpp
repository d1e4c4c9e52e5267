// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "agentkit/practice/practice.hpp"
#include "unit/support.hpp"

using namespace agentkit;
using namespace agentkit::practice;
using runtime::Termination;
using runtime::Trajectory;
using testutil::call;
using testutil::text;

namespace {

Trajectory answered(const std::string& a) {
  Trajectory t;
  t.termination = Termination::answered;
  t.final_answer = a;
  return t;
}

Trajectory timed_out() {
  Trajectory t;
  t.termination = Termination::episode_timeout;
  return t;
}

RolloutGroup group_of(std::vector<Trajectory> ts, std::optional<std::string> gt = std::nullopt) {
  RolloutGroup g;
  g.task_id = "t1";
  g.task = "What is 6*7?";
  g.ground_truth = std::move(gt);
  g.trajectories = std::move(ts);
  return g;
}

BankEdit add(const std::string& text) { return {BankEdit::Op::add, "", text}; }

bool is_distill_request(const llm::ChatRequest& r) {
  return r.messages.size() >= 1 && r.messages[0].content.rfind("You improve an agent", 0) == 0;
}

std::size_t experience_count(const llm::ChatRequest& r) {
  const auto& sys = r.messages[0].content;
  auto pos = sys.find("## Learned Experiences");
  if (pos == std::string::npos) return 0;
  std::size_t n = 0;
  for (auto p = sys.find('\n', pos); p != std::string::npos; p = sys.find('\n', p + 1)) ++n;
  return n;
}

std::size_t tool_messages(const llm::ChatRequest& r) {
  std::size_t n = 0;
  for (const auto& m : r.messages)
    if (m.role == llm::Role::tool) ++n;
  return n;
}

runtime::RuntimeDeps deps_with(const std::shared_ptr<llm::Gateway>& gw) {
  auto d = testutil::deps_for(gw);
  d.env_factory = testutil::mock_env_factory();
  return d;
}

}  // namespace

// ---------------------------------------------------------------- bank

TEST(Bank, AddReviseRemoveKeep) {
  ExperienceBank bank;
  EXPECT_TRUE(bank.apply({add("Check units."), add("Verify arithmetic with a tool.")}, 1, "t1").empty());
  ASSERT_EQ(bank.size(), 2u);
  EXPECT_EQ(bank.entries()[0].id, "E1");
  EXPECT_EQ(bank.entries()[1].id, "E2");
  EXPECT_EQ(bank.entries()[1].origin_task_id, "t1");

  auto rejected = bank.apply({{BankEdit::Op::revise, "E1", "Always check units."},
                              {BankEdit::Op::revise, "E9", "ghost"},
                              {BankEdit::Op::remove, "E2", ""},
                              {BankEdit::Op::keep, "", ""}},
                             2, "t2");
  ASSERT_EQ(rejected.size(), 1u);
  EXPECT_EQ(rejected[0].edit.target_id, "E9");
  ASSERT_EQ(bank.size(), 1u);
  EXPECT_EQ(bank.entries()[0].text, "Always check units.");
  EXPECT_EQ(bank.entries()[0].epoch_added, 1);
  EXPECT_EQ(bank.entries()[0].last_modified_epoch, 2);

  bank.apply({add("Third.")}, 3, "t3");
  EXPECT_EQ(bank.entries().back().id, "E3");  // ids never reused
}

TEST(Bank, RejectsEmptyAndOverlongText) {
  ExperienceBank bank(32, 64);
  std::string long_text;
  for (int i = 0; i < 65; ++i) long_text += "word ";
  std::string ok_text;
  for (int i = 0; i < 64; ++i) ok_text += "word ";
  auto rejected = bank.apply({add("   "), add(long_text), add(ok_text)}, 1, "t");
  EXPECT_EQ(rejected.size(), 2u);
  EXPECT_EQ(bank.size(), 1u);
}

TEST(Bank, FullBankEvictsOldest) {
  ExperienceBank bank(3);
  bank.apply({add("a"), add("b"), add("c")}, 1, "t");
  bank.apply({add("d")}, 2, "t");
  ASSERT_EQ(bank.size(), 3u);
  EXPECT_EQ(bank.texts(), (std::vector<std::string>{"b", "c", "d"}));
  EXPECT_EQ(bank.entries().back().id, "E4");
}

TEST(Bank, RandomEditsRespectCapacityAndRoundTrip) {
  std::mt19937 rng(5);
  ExperienceBank bank(8);
  for (int step = 0; step < 500; ++step) {
    std::vector<BankEdit> edits;
    for (int i = 0; i < 3; ++i) {
      BankEdit e;
      e.op = static_cast<BankEdit::Op>(rng() % 4);
      e.target_id = "E" + std::to_string(1 + rng() % (step + 2));
      e.text = rng() % 10 == 0 ? "" : "lesson " + std::to_string(rng() % 100);
      edits.push_back(e);
    }
    bank.apply(edits, step, "t");
    ASSERT_LE(bank.size(), 8u);
    for (const auto& e : bank.entries()) ASSERT_FALSE(e.text.empty());
    ASSERT_EQ(ExperienceBank::from_json(bank.to_json()), bank);
  }
}

TEST(Bank, SnapshotsAreWriteOnce) {
  auto root = testutil::temp_dir("banks");
  ExperienceBank bank;
  bank.apply({add("x")}, 1, "t");
  auto p = snapshot_path(root, "r1", 2);
  EXPECT_EQ(p, root / "r1" / "epoch_2.json");
  write_snapshot(bank, p);
  EXPECT_EQ(read_snapshot(p), bank);
  EXPECT_THROW(write_snapshot(ExperienceBank(), p), std::exception);
  EXPECT_EQ(read_snapshot(p), bank);
}

TEST(Bank, EditJson) {
  EXPECT_EQ(bank_edit_from_json(Json{{"op", "revise"}, {"target_id", "E1"}, {"text", "x"}}),
            (BankEdit{BankEdit::Op::revise, "E1", "x"}));
  EXPECT_THROW(bank_edit_from_json(Json{{"op", "explode"}}), std::invalid_argument);
  BankEdit e{BankEdit::Op::add, "", "y"};
  EXPECT_EQ(bank_edit_from_json(to_json(e)), e);
}

// ---------------------------------------------------------------- scoring

TEST(Score, GroundTruthExactMatch) {
  auto g = group_of({answered("42"), answered("42."), answered("41"), timed_out(), answered(" 42 ")}, "42");
  score_group(g, ScoreMode::ground_truth);
  EXPECT_EQ(g.rewards, (std::vector<double>{1, 1, 0, 0, 1}));
  EXPECT_EQ(g.trajectories[0].reward, 1.0);
}

TEST(Score, SelfConsistencyMajority) {
  auto g = group_of({answered("42"), answered("42"), answered("41"), timed_out(), answered("42")});
  score_group(g, ScoreMode::self_consistency);
  EXPECT_EQ(g.rewards, (std::vector<double>{1, 1, 0, 0, 1}));
}

TEST(Score, SelfConsistencyTie) {
  auto g = group_of({answered("a"), answered("b"), answered("a"), answered("b"), timed_out()});
  score_group(g, ScoreMode::self_consistency);
  EXPECT_EQ(g.rewards, (std::vector<double>{0.5, 0.5, 0.5, 0.5, 0}));
}

TEST(Score, NonAnsweredAlwaysZeroAndMissingTruthThrows) {
  auto all_failed = group_of({timed_out(), timed_out()}, "x");
  score_group(all_failed, ScoreMode::ground_truth);
  EXPECT_EQ(all_failed.rewards, (std::vector<double>{0, 0}));
  auto none = group_of({answered("x"), answered("y")});
  EXPECT_THROW(score_group(none, ScoreMode::ground_truth), MissingGroundTruth);
}

// ---------------------------------------------------------------- rollout

TEST(Rollout, GroupOfFiveWithBankInjected) {
  auto transport = std::make_shared<llm::FunctionTransport>([](const llm::ChatRequest& r) {
    return text("seed " + std::to_string(r.seed.value_or(-1)));
  });
  auto gw = std::make_shared<llm::Gateway>(transport);
  ExperienceBank bank;
  bank.apply({add("Double-check the result.")}, 1, "t0");
  GroupOptions opts;
  auto g = rollout_group(testutil::make_config("p"), "t1", "task", std::string("x"), bank, opts, deps_with(gw));
  ASSERT_EQ(g.trajectories.size(), 5u);
  EXPECT_TRUE(g.rewards.empty());
  for (int i = 0; i < 5; ++i) EXPECT_EQ(g.trajectories[i].final_answer.value_or(""), "seed " + std::to_string(i));
}

TEST(Rollout, TemperatureAndExperiencesReachEveryRequest) {
  std::mutex mu;
  std::vector<llm::ChatRequest> seen;
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([&](const llm::ChatRequest& r) {
    std::lock_guard lock(mu);
    seen.push_back(r);
    return text("ok");
  }));
  ExperienceBank bank;
  bank.apply({add("One."), add("Two.")}, 1, "t0");
  rollout_group(testutil::make_config("p"), "t1", "task", std::nullopt, bank, GroupOptions{}, deps_with(gw));
  ASSERT_EQ(seen.size(), 5u);
  for (const auto& r : seen) {
    EXPECT_DOUBLE_EQ(r.temperature, 0.7);
    EXPECT_EQ(experience_count(r), 2u);
  }
}

TEST(Rollout, GroupSizeOneRejected) {
  testutil::ScriptedRig rig;
  GroupOptions opts;
  opts.group_size = 1;
  EXPECT_THROW(rollout_group(testutil::make_config("p"), "t", "task", std::nullopt, ExperienceBank(), opts, deps_with(rig.gateway)),
               std::invalid_argument);
}

TEST(Rollout, AllTimeoutsRetained) {
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>(
      [](const llm::ChatRequest&) { return text("late"); }, std::chrono::milliseconds(2000)));
  auto cfg = testutil::make_config("p");
  cfg.timeouts = {0.3, 0.3, 0.3};
  auto g = rollout_group(cfg, "t", "task", std::nullopt, ExperienceBank(), GroupOptions{}, deps_with(gw));
  ASSERT_EQ(g.trajectories.size(), 5u);
  for (const auto& t : g.trajectories) EXPECT_EQ(t.termination, Termination::episode_timeout);
}

// ---------------------------------------------------------------- distillation

TEST(Distill, ZeroContrastSkips) {
  testutil::ScriptedRig rig;
  auto g = group_of({answered("1"), answered("1")}, "1");
  score_group(g, ScoreMode::ground_truth);
  EXPECT_TRUE(distill_semantic_advantage(g, ExperienceBank(), *rig.gateway).empty());
  EXPECT_FALSE(g.semantic_advantage);
  EXPECT_EQ(rig.transport->requests().size(), 0u);
}

TEST(Distill, OneAddGrowsBank) {
  testutil::ScriptedRig rig;
  rig.transport->push(text("Lesson:\n```json\n[{\"op\": \"add\", \"text\": \"Compute with the calculator.\"}]\n```"));
  auto g = group_of({answered("42"), answered("41")}, "42");
  score_group(g, ScoreMode::ground_truth);
  ExperienceBank bank;
  auto edits = distill_semantic_advantage(g, bank, *rig.gateway);
  ASSERT_EQ(edits.size(), 1u);
  bank.apply(edits, 1, g.task_id);
  EXPECT_EQ(bank.size(), 1u);
  ASSERT_TRUE(g.semantic_advantage);
  auto prompt = rig.transport->requests()[0].messages[0].content;
  EXPECT_NE(prompt.find("What is 6*7?"), std::string::npos);
  EXPECT_NE(prompt.find("Reference answer: 42"), std::string::npos);
  EXPECT_NE(prompt.find("reward 0"), std::string::npos);
  EXPECT_DOUBLE_EQ(rig.transport->requests()[0].temperature, 0.3);
}

TEST(Distill, RevisingUnknownIdRejectedOthersApplied) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(R"({"edits": [{"op": "revise", "target_id": "E7", "text": "x"}, {"op": "add", "text": "Keep going."}]})"));
  auto g = group_of({answered("1"), answered("2")}, "1");
  score_group(g, ScoreMode::ground_truth);
  ExperienceBank bank;
  auto rejected = bank.apply(distill_semantic_advantage(g, bank, *rig.gateway), 1, "t1");
  ASSERT_EQ(rejected.size(), 1u);
  EXPECT_EQ(rejected[0].edit.target_id, "E7");
  EXPECT_EQ(bank.texts(), std::vector<std::string>{"Keep going."});
}

TEST(Distill, RepromptThenError) {
  testutil::ScriptedRig rig;
  rig.transport->push(text("no edits here"));
  rig.transport->push(text("```json\n[{\"op\": \"keep\"}]\n```"));
  auto g = group_of({answered("1"), answered("2")}, "1");
  score_group(g, ScoreMode::ground_truth);
  EXPECT_EQ(distill_semantic_advantage(g, ExperienceBank(), *rig.gateway).size(), 1u);
  EXPECT_EQ(rig.transport->requests().size(), 2u);

  testutil::ScriptedRig bad;
  bad.transport->push(text("nope"));
  bad.transport->push(text("still nope"));
  EXPECT_THROW(distill_semantic_advantage(g, ExperienceBank(), *bad.gateway), DistillError);
}

TEST(Distill, SummariesTruncateArguments) {
  testutil::ScriptedRig rig;
  rig.transport->push(call("c", "search", Json{{"query", std::string(200, 'q')}}));
  rig.transport->push(text("done"));
  auto t = runtime::run_episode(testutil::make_config("s", {"search"}), "find", deps_with(rig.gateway));
  auto s = summarize_attempt(t, 1.0, DistillOptions{});
  EXPECT_EQ(s.rfind("reward 1\n", 0), 0u) << s;
  EXPECT_NE(s.find("search("), std::string::npos);
  EXPECT_NE(s.find("..."), std::string::npos);
  EXPECT_EQ(s.find(std::string(100, 'q')), std::string::npos);
  EXPECT_NE(s.find("done"), std::string::npos);
  DistillOptions full;
  full.full_transcripts = true;
  EXPECT_NE(summarize_attempt(t, 1.0, full).find(std::string(150, 'q')), std::string::npos);
}

// ---------------------------------------------------------------- epoch loop

TEST(PracticeRun, ImprovingScenarioFollowsScriptedRewards) {
  // An attempt with seed s is correct iff s < bank size + 1. Correct attempts
  // make one tool call, wrong ones two. Each contrasting group adds one entry.
  // Two tasks, G=5: epoch rewards 1/5, 3/5, 5/5; tool calls 9/5, 7/5, 5/5.
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([](const llm::ChatRequest& r) {
    if (is_distill_request(r)) return text("```json\n[{\"op\": \"add\", \"text\": \"Use one calculation.\"}]\n```");
    const bool correct = static_cast<std::size_t>(r.seed.value_or(0)) < experience_count(r) + 1;
    const auto tools_seen = tool_messages(r);
    if (tools_seen < (correct ? 1u : 2u)) return call("", "calculate", Json{{"expression", "2+2"}});
    const bool first = r.messages[1].content == "first";
    return text(correct ? (first ? "4" : "9") : "7");
  }));
  std::vector<eval::EvalTask> data{{"a", "first", "4", {}}, {"b", "second", "9", {}}};
  PracticeOptions opts;
  opts.banks_root = testutil::temp_dir("practice");
  opts.run_id = "improve";
  auto [bank, report] = practice_run(testutil::make_config("p", {"math_eval"}), data, opts, deps_with(gw));

  ASSERT_EQ(report.epochs.size(), 3u);
  const std::vector<double> rewards{0.2, 0.6, 1.0};
  const std::vector<double> calls{1.8, 1.4, 1.0};
  const std::vector<std::size_t> sizes{2, 4, 4};
  for (int e = 0; e < 3; ++e) {
    EXPECT_NEAR(report.epochs[e].mean_reward, rewards[e], 1e-12) << e;
    EXPECT_NEAR(report.epochs[e].mean_tool_calls, calls[e], 1e-12) << e;
    EXPECT_EQ(report.epochs[e].bank_size, sizes[e]);
    EXPECT_EQ(report.epochs[e].episodes, 10u);
  }
  EXPECT_LT(report.epochs[0].mean_reward, report.epochs[1].mean_reward);
  EXPECT_LT(report.epochs[1].mean_reward, report.epochs[2].mean_reward);
  EXPECT_EQ(report.epochs[2].groups_skipped, 2u);
  EXPECT_EQ(bank.size(), 4u);

  // snapshots reconstruct every epoch
  ASSERT_EQ(report.snapshots.size(), 4u);
  for (int e = 0; e <= 3; ++e) {
    auto disk = read_snapshot(snapshot_path(*opts.banks_root, "improve", e));
    EXPECT_EQ(disk, ExperienceBank::from_json(report.snapshots[e]));
    EXPECT_EQ(disk.size(), e == 0 ? 0u : sizes[e - 1]);
  }
  EXPECT_EQ(ExperienceBank::from_json(report.snapshots[3]), bank);
}

TEST(PracticeRun, SucceedAllLeavesBankUnchanged) {
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([](const llm::ChatRequest& r) {
    if (is_distill_request(r)) ADD_FAILURE() << "no distillation expected";
    return text("4");
  }));
  PracticeOptions opts;
  opts.epochs = 1;
  auto [bank, report] = practice_run(testutil::make_config("p"), {{"a", "2+2", "4", {}}}, opts, deps_with(gw));
  EXPECT_TRUE(bank.empty());
  EXPECT_EQ(report.epochs[0].groups_skipped, 1u);
  EXPECT_DOUBLE_EQ(report.epochs[0].mean_reward, 1.0);
}

TEST(PracticeRun, HundredTasksThreeEpochsAttemptFifteenHundredEpisodes) {
  std::atomic<int> agent_calls{0};
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([&](const llm::ChatRequest& r) {
    if (is_distill_request(r)) return text("[]");
    ++agent_calls;
    return text(std::to_string(r.seed.value_or(0) % 2));
  }));
  std::vector<eval::EvalTask> data;
  for (int i = 0; i < 100; ++i) data.push_back({"t" + std::to_string(i), "task " + std::to_string(i), "1", {}});
  PracticeOptions opts;
  auto [bank, report] = practice_run(testutil::make_config("p"), data, opts, deps_with(gw));
  std::size_t episodes = 0;
  for (const auto& e : report.epochs) episodes += e.episodes;
  EXPECT_EQ(episodes, 1500u);
  EXPECT_EQ(agent_calls.load(), 1500);
  EXPECT_NEAR(report.epochs[0].mean_reward, 0.4, 1e-12);
}

TEST(PracticeRun, EmptyBankPromptsMatchPlainEpisodes) {
  std::mutex mu;
  std::vector<llm::ChatRequest> seen;
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([&](const llm::ChatRequest& r) {
    std::lock_guard lock(mu);
    seen.push_back(r);
    return text("4");
  }));
  auto cfg = testutil::make_config("p");
  PracticeOptions opts;
  opts.epochs = 1;
  opts.group.group_size = 2;
  practice_run(cfg, {{"a", "2+2", "4", {}}}, opts, deps_with(gw));
  auto from_practice = seen;
  seen.clear();
  for (int s = 0; s < 2; ++s) {
    auto d = deps_with(gw);
    d.seed = s;
    d.temperature = 0.7;
    runtime::run_episode(cfg, "2+2", d);
  }
  auto by_seed = [](std::vector<llm::ChatRequest> v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
    return v;
  };
  EXPECT_EQ(by_seed(from_practice), by_seed(seen));
}

TEST(PracticeRun, MissingTruthUnderGroundTruthModeIsLoggedAndSkipped) {
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([](const llm::ChatRequest&) { return text("x"); }));
  PracticeOptions opts;
  opts.epochs = 1;
  opts.mode = ScoreMode::ground_truth;
  auto [bank, report] = practice_run(testutil::make_config("p"), {{"a", "no answer", std::nullopt, {}}}, opts, deps_with(gw));
  EXPECT_EQ(report.epochs[0].task_failures, 1u);
  EXPECT_FALSE(report.log.empty());
}

TEST(PracticeRun, Preconditions) {
  testutil::ScriptedRig rig;
  EXPECT_THROW(practice_run(testutil::make_config("p"), {}, PracticeOptions{}, deps_with(rig.gateway)), std::invalid_argument);
}

// ---------------------------------------------------------------- testing with the bank

TEST(TestWithBank, EmptyBankEqualsPlainEval) {
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>(
      [](const llm::ChatRequest& r) { return text(r.messages[1].content == "a" ? "1" : "0"); }));
  std::vector<eval::EvalTask> tasks{{"1", "a", "1", {}}, {"2", "b", "1", {}}};
  eval::EvalOptions opts;
  opts.metric = eval::Metric::mean_at_k;
  opts.k = 4;
  auto plain = eval::evaluate(testutil::make_config("p"), tasks, opts, deps_with(gw));
  auto banked = test_with_bank(testutil::make_config("p"), ExperienceBank(), tasks, 0.7, opts, deps_with(gw));
  EXPECT_DOUBLE_EQ(plain.aggregate, banked.aggregate);
  EXPECT_EQ(plain.to_json()["per_task"], banked.to_json()["per_task"]);
}

TEST(TestWithBank, TemperatureAndMeanAt32) {
  std::atomic<int> hot{0};
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>([&](const llm::ChatRequest& r) {
    if (r.temperature != 0.3) ++hot;
    return text(r.seed.value_or(0) % 4 == 0 ? "yes" : "no");
  }));
  ExperienceBank bank;
  bank.apply({add("Be precise.")}, 1, "t");
  eval::EvalOptions opts;
  opts.metric = eval::Metric::mean_at_k;
  opts.k = 32;
  auto report = test_with_bank(testutil::make_config("p"), bank, {{"1", "q", "yes", {}}}, 0.3, opts, deps_with(gw));
  EXPECT_EQ(hot.load(), 0);
  EXPECT_DOUBLE_EQ(report.aggregate, 8.0 / 32.0);
  EXPECT_EQ(report.k, 32);
  ASSERT_TRUE(report.temperature);
  EXPECT_DOUBLE_EQ(*report.temperature, 0.3);
}
