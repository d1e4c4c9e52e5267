// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "agentkit/autogen/library.hpp"
#include "agentkit/autogen/meta_agent.hpp"
#include "agentkit/autogen/prompts.hpp"
#include "agentkit/autogen/synthesis.hpp"
#include "agentkit/autogen/workflow.hpp"
#include "agentkit/env/environment.hpp"
#include "agentkit/tools/catalog.hpp"
#include "unit/support.hpp"

using namespace agentkit;
using namespace agentkit::autogen;
using testutil::call;
using testutil::text;

namespace {

const char* kZodiacTool = R"(def zodiac_sign(month: int, day: int) -> str:
    """Return the western zodiac sign for a birth date.

    Args:
        month: Month number from 1 to 12.
        day: Day of the month.
    """
    if (month == 3 and day >= 21) or (month == 4 and day <= 19):
        return "aries"
    return "other"
)";

const char* kZodiacTest = R"(assert zodiac_sign(4, 1) == "aries"
assert zodiac_sign(7, 7) == "other"
)";

const char* kPapersTool = R"(def fetch_daily_papers(date: str) -> str:
    """Fetch the trending papers of a day as newline-joined records.

    Args:
        date: Day in YYYY-MM-DD form.
    """
    records = [date + " | Paper A | 2401.00001", date + " | Paper B | 2401.00002"]
    return "\n".join(records)
)";

const char* kPapersTest = R"(out = fetch_daily_papers("2024-01-02")
assert out.count("\n") == 1
assert out.startswith("2024-01-02 | Paper A")
)";

std::string tool_reply(const std::string& source, const std::string& test, const std::string& tags = "") {
  std::string r = "```python\n" + source + "```\n\n```python\n" + test + "```\n";
  if (!tags.empty()) r += "\n```json\n{\"tags\": " + tags + "}\n```\n";
  return r;
}

std::string spec_reply(const std::string& objective, const std::vector<std::string>& caps) {
  Json j{{"objective", objective}, {"required_capabilities", caps}, {"env_constraints", Json::array()}, {"open_questions", Json::array()}};
  return "Here is the spec:\n```json\n" + j.dump(2) + "\n```\n";
}

std::shared_ptr<env::Environment> sandbox() {
  return std::shared_ptr<env::Environment>(env::create_env({"sandbox", Json::object()}, {testutil::temp_dir("gen"), 30}));
}

ToolLibrary builtin_library() { return ToolLibrary(tools::ToolkitCatalog::builtin()); }

SynthesizedTool passing_tool(const std::string& name, std::vector<std::string> tags, const std::string& description) {
  SynthesizedTool t;
  t.tool.name = name;
  t.tool.description = description;
  t.tool.source = tools::ToolSource::synthesized;
  t.source_code = "def " + name + "() -> str:\n    return 'ok'\n";
  t.self_test = "assert " + name + "() == 'ok'\n";
  t.report = {true, 1, ""};
  t.tags = std::move(tags);
  return t;
}

}  // namespace

// ---------------------------------------------------------------- prompts

TEST(Prompts, StagePromptsAreBundled) {
  for (const char* name : {"clarify", "clarify_retry", "synthesize_tool", "repair_tool", "instructions", "meta_agent", "distill",
                           "distill_retry"})
    EXPECT_FALSE(prompts::get(name).empty()) << name;
  EXPECT_THROW(prompts::get("nope"), std::out_of_range);
}

// ---------------------------------------------------------------- clarify

TEST(Clarify, ParsesCannedSpecExactly) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(spec_reply("Summarize today's trending papers", {"paper-search", "paper-download", "summarization"})));
  auto spec = clarify("Summarize today's trending papers on arXiv", *rig.gateway);
  RequirementSpec expected{"Summarize today's trending papers", {"paper-search", "paper-download", "summarization"}, {}, {}};
  EXPECT_EQ(spec, expected);
  auto req = rig.transport->requests();
  ASSERT_EQ(req.size(), 1u);
  EXPECT_NE(req[0].messages[0].content.find("Summarize today's trending papers on arXiv"), std::string::npos);
}

TEST(Clarify, RetriesOnceThenFails) {
  testutil::ScriptedRig rig;
  rig.transport->push(text("no json here"));
  rig.transport->push(text(spec_reply("Do things", {"web-search"})));
  EXPECT_EQ(clarify("do things", *rig.gateway).objective, "Do things");
  EXPECT_EQ(rig.transport->requests().size(), 2u);

  testutil::ScriptedRig bad;
  bad.transport->push(text("```json\n{\"objective\": \"\"}\n```"));
  bad.transport->push(text("still nothing"));
  try {
    clarify("do things", *bad.gateway);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.stage(), "clarify");
    EXPECT_EQ(e.stage_number(), 1);
  }
}

TEST(Clarify, EmptyDescriptionRejected) {
  testutil::ScriptedRig rig;
  EXPECT_THROW(clarify("   ", *rig.gateway), std::invalid_argument);
  EXPECT_EQ(rig.transport->requests().size(), 0u);
}

TEST(Clarify, SpecJsonValidation) {
  EXPECT_THROW(requirement_spec_from_json(Json{{"objective", ""}}), std::invalid_argument);
  EXPECT_THROW(requirement_spec_from_json(Json{{"objective", "x"}, {"required_capabilities", "web"}}), std::invalid_argument);
  RequirementSpec s{"x", {"a"}, {"b"}, {"c"}};
  EXPECT_EQ(requirement_spec_from_json(to_json(s)), s);
}

// ---------------------------------------------------------------- library search

TEST(Library, ArxivDownloadRankedFirst) {
  auto lib = builtin_library();
  auto hits = search_tools(lib, "download arxiv pdf", 3);
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0].qualified(), "arxiv.download_papers");
}

TEST(Library, NoOverlapIsEmpty) { EXPECT_TRUE(search_tools(builtin_library(), "zodiac horoscope", 5).empty()); }

TEST(Library, TiesBreakLexicographically) {
  ToolLibrary lib;
  lib.add_synthesized(passing_tool("zeta_tool", {"weather"}, "Forecast."), CreatedBy::workflow);
  lib.add_synthesized(passing_tool("alpha_tool", {"weather"}, "Forecast."), CreatedBy::workflow);
  auto hits = search_tools(lib, "weather", 5);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].name, "alpha_tool");
  EXPECT_EQ(hits[1].name, "zeta_tool");
  EXPECT_EQ(search_tools(lib, "weather", 1).size(), 1u);
  EXPECT_THROW(search_tools(lib, "weather", 0), std::invalid_argument);
}

TEST(Library, SearchIsPure) {
  auto lib = builtin_library();
  for (const char* q : {"web search", "python code", "read file", "paper"}) {
    auto a = search_tools(lib, q, 4), b = search_tools(lib, q, 4);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].qualified(), b[i].qualified());
  }
}

TEST(Library, OnlyPassingUniqueToolsRegister) {
  ToolLibrary lib = builtin_library();
  auto failing = passing_tool("broken", {}, "x");
  failing.report.passed = false;
  EXPECT_THROW(lib.add_synthesized(failing, CreatedBy::workflow), LibraryError);
  lib.add_synthesized(passing_tool("fresh", {}, "x"), CreatedBy::meta_agent);
  EXPECT_THROW(lib.add_synthesized(passing_tool("fresh", {}, "x"), CreatedBy::meta_agent), LibraryError);
  EXPECT_THROW(lib.add_synthesized(passing_tool("search", {}, "x"), CreatedBy::meta_agent), LibraryError);
  for (const auto& e : lib.entries())
    if (e.synthesized) EXPECT_TRUE(e.synthesized->report.passed);
  EXPECT_TRUE(lib.snapshot().toolkits.count("fresh"));
}

TEST(Library, SaveLoadRoundTrip) {
  auto dir = testutil::temp_dir("lib");
  ToolLibrary lib = builtin_library();
  lib.add_synthesized(passing_tool("one_tool", {"alpha"}, "First."), CreatedBy::workflow);
  lib.add_synthesized(passing_tool("two_tool", {"beta"}, "Second."), CreatedBy::meta_agent);
  lib.save(dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "library.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "tools" / "one_tool.py"));
  EXPECT_TRUE(std::filesystem::exists(dir / "tools" / "one_tool_test.py"));

  ToolLibrary again = builtin_library();
  again.load(dir);
  auto e = again.find("two_tool");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->created_by, CreatedBy::meta_agent);
  EXPECT_EQ(e->tags, std::vector<std::string>{"beta"});
  ASSERT_TRUE(e->synthesized);
  EXPECT_EQ(e->synthesized->source_code, "def two_tool() -> str:\n    return 'ok'\n");
  EXPECT_EQ(again.entries().size(), lib.entries().size());

  ToolLibrary empty;
  EXPECT_NO_THROW(empty.load(dir / "missing"));
  EXPECT_TRUE(empty.entries().empty());
}

// ---------------------------------------------------------------- synthesis

TEST(Synthesis, SignatureOfDailyPapersTool) {
  auto sig = parse_python_function(kPapersTool);
  ASSERT_TRUE(sig);
  EXPECT_EQ(sig->name, "fetch_daily_papers");
  EXPECT_EQ(sig->summary, "Fetch the trending papers of a day as newline-joined records.");
  Json expected{{"type", "object"},
                {"properties", {{"date", {{"type", "string"}, {"description", "Day in YYYY-MM-DD form."}}}}},
                {"required", {"date"}},
                {"additionalProperties", false}};
  EXPECT_EQ(schema_from_signature(*sig), expected);
}

TEST(Synthesis, SignatureTypesAndDefaults) {
  auto sig = parse_python_function("import os\n\ndef f(a: str, b: int = 3, c: float = 1.0, d: bool = False, e: list = None,\n      g: dict = None, h=2):\n    return ''\n");
  ASSERT_TRUE(sig);
  auto s = schema_from_signature(*sig);
  EXPECT_EQ(s["required"], Json::array({"a"}));
  EXPECT_EQ(s["properties"]["b"]["type"], "integer");
  EXPECT_EQ(s["properties"]["c"]["type"], "number");
  EXPECT_EQ(s["properties"]["d"]["type"], "boolean");
  EXPECT_EQ(s["properties"]["e"]["type"], "array");
  EXPECT_EQ(s["properties"]["g"]["type"], "object");
  EXPECT_FALSE(s["properties"]["h"].contains("type"));
  EXPECT_FALSE(parse_python_function("x = 1\n"));
}

TEST(Synthesis, PassesInRoundOne) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(tool_reply(kPapersTool, kPapersTest, R"(["paper", "daily"])")));
  auto sb = sandbox();
  auto t = synthesize_tool("fetch today's papers", builtin_library(), *rig.gateway, *sb);
  EXPECT_TRUE(t.report.passed);
  EXPECT_EQ(t.report.rounds_used, 1);
  EXPECT_EQ(t.tool.name, "fetch_daily_papers");
  EXPECT_EQ(t.tool.source, tools::ToolSource::synthesized);
  EXPECT_EQ(t.tool.parameters["required"], Json::array({"date"}));
  EXPECT_EQ(t.tags, (std::vector<std::string>{"paper", "daily"}));
}

TEST(Synthesis, RepairedInRoundTwo) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(tool_reply(kZodiacTool, "assert zodiac_sign(4, 1) == \"taurus\"\n")));
  rig.transport->push(text(tool_reply(kZodiacTool, kZodiacTest)));
  auto sb = sandbox();
  auto t = synthesize_tool("zodiac lookup", builtin_library(), *rig.gateway, *sb);
  EXPECT_TRUE(t.report.passed);
  EXPECT_EQ(t.report.rounds_used, 2);
  auto reqs = rig.transport->requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_NE(reqs[1].messages.back().content.find("AssertionError"), std::string::npos);
  EXPECT_NE(reqs[1].messages.back().content.find("round 1 of 3"), std::string::npos);
}

TEST(Synthesis, ThreeFailedRoundsRaiseWithReport) {
  testutil::ScriptedRig rig;
  for (int i = 0; i < 3; ++i) rig.transport->push(text(tool_reply(kZodiacTool, "assert False, 'nope'\n")));
  auto sb = sandbox();
  try {
    synthesize_tool("zodiac lookup", builtin_library(), *rig.gateway, *sb);
    FAIL();
  } catch (const SynthesisFailed& e) {
    EXPECT_FALSE(e.report().passed);
    EXPECT_EQ(e.report().rounds_used, 3);
    EXPECT_NE(e.report().last_error.find("nope"), std::string::npos);
    EXPECT_EQ(e.attempt().tool.name, "zodiac_sign");
  }
  EXPECT_EQ(rig.transport->remaining(), 0u);
}

TEST(Synthesis, MissingBlocksAndNameClashFeedTheRepairLoop) {
  testutil::ScriptedRig rig;
  rig.transport->push(text("just prose"));
  rig.transport->push(text(tool_reply("def search(q: str) -> str:\n    return q\n", "assert search('a') == 'a'\n")));
  rig.transport->push(text(tool_reply(kZodiacTool, kZodiacTest)));
  auto sb = sandbox();
  auto t = synthesize_tool("anything", builtin_library(), *rig.gateway, *sb);
  EXPECT_EQ(t.report.rounds_used, 3);
  auto reqs = rig.transport->requests();
  EXPECT_NE(reqs[2].messages.back().content.find("already exists"), std::string::npos);
}

TEST(Synthesis, ScriptToolkitRunsInTheEnvironment) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(tool_reply(kZodiacTool, kZodiacTest)));
  auto sb = sandbox();
  auto t = synthesize_tool("zodiac lookup", builtin_library(), *rig.gateway, *sb);
  ToolLibrary lib = builtin_library();
  lib.add_synthesized(t, CreatedBy::workflow);
  auto catalog = tools::ToolkitCatalog::builtin();
  lib.install(catalog);
  auto cfg = testutil::make_config("z", {"zodiac_sign"});
  auto reg = tools::build_registry(cfg, sb, catalog);
  auto r = reg.invoke(tools::ToolCall{"1", "zodiac_sign", Json{{"month", 3}, {"day", 25}}}, 10);
  EXPECT_EQ(r.status, tools::ToolStatus::ok) << r.content;
  EXPECT_EQ(r.content, "aries");
  EXPECT_EQ(reg.find("zodiac_sign")->source, tools::ToolSource::synthesized);
}

// ---------------------------------------------------------------- workflow

TEST(Workflow, ScriptedFourStageSession) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(spec_reply("Summarize daily trending papers", {"paper-download", "web-search", "zodiac-horoscope"})));
  rig.transport->push(text(tool_reply(kZodiacTool, kZodiacTest, R"(["zodiac", "horoscope"])")));
  rig.transport->push(text("You summarize papers.\nUse download_papers, then search for context."));
  ToolLibrary lib = builtin_library();
  auto sb = sandbox();
  auto [cfg, report] = generate_workflow("Summarize today's trending papers and add horoscopes", lib, *rig.gateway, *sb);

  // expected config written from the script above
  config::AgentConfig expected;
  expected.name = "Summarize_Daily_Trending_Agent";
  expected.instructions = "You summarize papers.\nUse download_papers, then search for context.\n";
  expected.env = {"sandbox", Json::object()};
  expected.toolkits = {{"arxiv", {{"download_papers"}, Json::object()}},
                       {"search", {{"search"}, Json::object()}},
                       {"zodiac_sign", {{}, Json::object()}}};
  EXPECT_EQ(cfg, expected);
  EXPECT_TRUE(report.config_valid);
  EXPECT_EQ(report.tools_attempted, 1u);
  EXPECT_EQ(report.tools_passed, 1u);
  ASSERT_EQ(report.stages.size(), 4u);
  EXPECT_EQ(report.stages[1]["artifact"]["retrieved"].size(), 2u);
  EXPECT_EQ(report.stages[1]["artifact"]["synthesized"][0]["tool"], "zodiac_sign");
  EXPECT_EQ(config::parse_config(report.config_yaml), cfg);
  EXPECT_TRUE(config::validate_config(cfg, lib.snapshot()).valid);
  auto entry = lib.find("zodiac_sign");
  ASSERT_TRUE(entry);
  EXPECT_EQ(entry->created_by, CreatedBy::workflow);
  EXPECT_EQ(rig.transport->remaining(), 0u);
}

TEST(Workflow, LibraryCoverageMeansNoSynthesis) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(spec_reply("Answer web questions with python", {"web-search", "python-execution"})));
  rig.transport->push(text("Search, then compute."));
  ToolLibrary lib = builtin_library();
  auto sb = sandbox();
  auto [cfg, report] = generate_workflow("web questions", lib, *rig.gateway, *sb);
  EXPECT_EQ(report.tools_attempted, 0u);
  EXPECT_EQ(rig.transport->requests().size(), 2u);
  ASSERT_EQ(cfg.toolkits.size(), 2u);
  EXPECT_EQ(cfg.toolkits[1].first, "python_executor");
  EXPECT_EQ(cfg.env.name, "sandbox");
}

TEST(Workflow, InvalidAssemblyFailsAtStageFour) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(spec_reply("Answer web questions", {"web-search"})));
  rig.transport->push(text("   "));
  ToolLibrary lib = builtin_library();
  auto sb = sandbox();
  try {
    generate_workflow("web questions", lib, *rig.gateway, *sb);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.stage(), "assemble");
    EXPECT_EQ(e.stage_number(), 4);
  }
}

TEST(Workflow, FailedSynthesisIsReportedNotRegistered) {
  testutil::ScriptedRig rig;
  rig.transport->push(text(spec_reply("Zodiac and web", {"web-search", "zodiac-horoscope"})));
  for (int i = 0; i < 3; ++i) rig.transport->push(text(tool_reply(kZodiacTool, "assert False\n")));
  rig.transport->push(text("Use search."));
  ToolLibrary lib = builtin_library();
  auto sb = sandbox();
  auto [cfg, report] = generate_workflow("zodiac", lib, *rig.gateway, *sb);
  EXPECT_EQ(report.tools_attempted, 1u);
  EXPECT_EQ(report.tools_passed, 0u);
  EXPECT_FALSE(lib.find("zodiac_sign"));
  EXPECT_EQ(report.stages[1]["artifact"]["failed"].size(), 1u);
  EXPECT_TRUE(report.config_valid);
}

TEST(Workflow, AgentNames) {
  EXPECT_EQ(agent_name_from("Summarize daily papers"), "Summarize_Daily_Papers_Agent");
  EXPECT_EQ(agent_name_from("answer QUESTIONS, about the web"), "Answer_Questions_About_Agent");
}

// ---------------------------------------------------------------- meta-agent

TEST(MetaAgent, TrendingPapersCaseStudy) {
  testutil::ScriptedRig rig;
  const std::string bad_yaml = "agent:\n  name: Paper_Agent\n  instructions: Summarize papers.\ntoolkits:\n  arxv: {}\n";
  const std::string good_yaml =
      "agent:\n  name: Paper_Agent\n  instructions: Summarize papers.\nenv:\n  name: sandbox\ntoolkits:\n  search: {}\n"
      "  arxiv: {}\n  fetch_daily_papers: {}\n";
  rig.transport->push(call("1", "ask_user", Json{{"question", "Which subject area?"}}));
  rig.transport->push(call("2", "search_tool", Json{{"query", "arxiv paper download"}}));
  rig.transport->push(call("3", "create_tool", Json{{"description", "fetch the trending papers of a given day"}}));
  rig.transport->push(text(tool_reply(kPapersTool, kPapersTest)));
  rig.transport->push(call("4", "create_agent_config", Json{{"yaml", bad_yaml}}));
  rig.transport->push(call("5", "create_agent_config", Json{{"yaml", good_yaml}}));

  auto session = std::make_shared<ScriptedDialogue>("Summarize today's trending papers", std::vector<std::string>{"machine learning"});
  auto lib = std::make_shared<ToolLibrary>(tools::ToolkitCatalog::builtin());
  auto [cfg, report] = run_meta_agent(session, lib, rig.gateway, sandbox());

  std::vector<std::string> toolkits;
  for (const auto& [name, act] : cfg.toolkits) toolkits.push_back(name);
  EXPECT_EQ(toolkits, (std::vector<std::string>{"search", "arxiv", "fetch_daily_papers"}));
  EXPECT_EQ(report.validation_bounces, 1u);
  EXPECT_EQ(report.tools_passed, 1u);
  EXPECT_TRUE(report.config_valid);
  EXPECT_EQ(report.mode, "meta_agent");
  EXPECT_EQ(lib->find("fetch_daily_papers")->created_by, CreatedBy::meta_agent);
  EXPECT_EQ(session->questions(), std::vector<std::string>{"Which subject area?"});

  auto reqs = rig.transport->requests();
  ASSERT_EQ(reqs.size(), 6u);
  // the registry holds exactly the four architect tools
  std::vector<std::string> declared;
  for (const auto& d : reqs[0].tools) declared.push_back(d.name);
  EXPECT_EQ(declared, meta_agent_tool_names());
  // the user's answer reaches the next request
  EXPECT_EQ(reqs[1].messages.back().content, "machine learning");
  EXPECT_NE(reqs[2].messages.back().content.find("arxiv"), std::string::npos);
  // the rejected config goes back as a tool error with a suggestion
  const auto& bounce = reqs[5].messages.back().content;
  EXPECT_EQ(bounce.rfind("[error] configuration rejected", 0), 0u) << bounce;
  EXPECT_NE(bounce.find("did you mean 'arxiv'"), std::string::npos) << bounce;

  bool preview = false, done = false;
  for (const auto& e : session->events()) {
    if (e["type"] == "config_preview") preview = true;
    if (e["type"] == "done") done = true;
  }
  EXPECT_TRUE(preview);
  EXPECT_TRUE(done);
}

TEST(MetaAgent, NoConfigIsGenerationError) {
  testutil::ScriptedRig rig;
  rig.transport->push(text("I cannot build that."));
  auto session = std::make_shared<ScriptedDialogue>("build something", std::vector<std::string>{});
  try {
    run_meta_agent(session, std::make_shared<ToolLibrary>(tools::ToolkitCatalog::builtin()), rig.gateway, sandbox());
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.stage(), "no_config");
  }
  ASSERT_FALSE(session->events().empty());
  EXPECT_EQ(session->events().back()["type"], "failed");
}

TEST(MetaAgent, TurnLimitWithoutValidConfig) {
  auto gw = std::make_shared<llm::Gateway>(std::make_shared<llm::FunctionTransport>(
      [](const llm::ChatRequest&) { return call("", "create_agent_config", Json{{"yaml", "agent: {}"}}); }));
  MetaAgentOptions opts;
  opts.max_turns = 3;
  auto session = std::make_shared<ScriptedDialogue>("x", std::vector<std::string>{});
  EXPECT_THROW(run_meta_agent(session, std::make_shared<ToolLibrary>(tools::ToolkitCatalog::builtin()), gw, sandbox(), opts), GenerationError);
}
