// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "agentkit/config/validate.hpp"
#include "agentkit/config/yaml_io.hpp"
#include "agentkit/tools/catalog.hpp"
#include "unit/support.hpp"

using namespace agentkit;
using namespace agentkit::config;

namespace {

const char* kListing = R"(agent:
  name: research_agent
  instructions: "You are a helpful research assistant..."
env:
  name: e2b
  config: {}
context_manager:
  name: base
  config: {}
toolkits:
  search:
    activated_tools: ["search", "web_qa"]
  python_executor:
    activated_tools: ["execute_python_code"]
)";

RegistrySnapshot registries() { return tools::ToolkitCatalog::builtin().snapshot(); }

std::vector<std::filesystem::path> corpus(const std::string& sub) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(testutil::data_path("configs/" + sub))) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(ParseConfig, ListingLoadsWithAliasedSandbox) {
  std::vector<std::string> warnings;
  auto cfg = parse_config(kListing, &warnings);
  EXPECT_EQ(cfg.name, "research_agent");
  EXPECT_EQ(cfg.env.name, "sandbox");
  ASSERT_EQ(cfg.toolkits.size(), 2u);
  EXPECT_EQ(cfg.toolkits[0].first, "search");
  EXPECT_EQ(cfg.toolkits[0].second.activated_tools, (std::vector<std::string>{"search", "web_qa"}));
  EXPECT_EQ(cfg.toolkits[1].first, "python_executor");
  EXPECT_EQ(cfg.toolkits[1].second.activated_tools, (std::vector<std::string>{"execute_python_code"}));
  ASSERT_FALSE(warnings.empty());
  EXPECT_NE(warnings[0].find("e2b"), std::string::npos);
}

TEST(ParseConfig, MinimalConfigGetsDefaults) {
  auto cfg = parse_config("agent:\n  name: a\n  instructions: hi\n");
  EXPECT_EQ(cfg.env.name, "mock");
  EXPECT_EQ(cfg.context_manager.name, "base");
  EXPECT_TRUE(cfg.toolkits.empty());
  EXPECT_DOUBLE_EQ(cfg.sampling.temperature, 0.7);
  EXPECT_EQ(cfg.sampling.max_turns, 32);
  EXPECT_DOUBLE_EQ(cfg.timeouts.tool_s, 30);
  EXPECT_DOUBLE_EQ(cfg.timeouts.step_s, 120);
  EXPECT_DOUBLE_EQ(cfg.timeouts.episode_s, 600);
}

TEST(ParseConfig, TimeoutOrderIsSchemaErrorAtTimeouts) {
  try {
    parse_config("agent:\n  name: a\n  instructions: hi\ntimeouts:\n  tool_s: 700\n  episode_s: 600\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigErrorKind::Schema);
    EXPECT_EQ(e.path(), "timeouts");
  }
}

TEST(ParseConfig, UnknownTopLevelKeyRejected) {
  try {
    parse_config("agent:\n  name: a\n  instructions: hi\nmodel: x\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "model");
  }
}

TEST(ParseConfig, SyntaxErrorCarriesLine) {
  try {
    parse_config("agent:\n  name: [oops\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigErrorKind::Syntax);
    EXPECT_GT(e.line(), 0);
  }
}

TEST(ParseConfig, ToolkitConfigPassesThroughOpaquely) {
  auto cfg = parse_config(
      "agent:\n  name: a\n  instructions: hi\ntoolkits:\n  search:\n    config:\n      anything: [1, 2]\n      nested: {k: v}\n");
  EXPECT_EQ(cfg.toolkits[0].second.config["anything"], Json::array({1, 2}));
  EXPECT_EQ(cfg.toolkits[0].second.config["nested"]["k"], "v");
}

TEST(ParseConfig, DeterministicDefaulting) {
  EXPECT_EQ(parse_config(kListing), parse_config(kListing));
}

TEST(ValidateConfig, ValidReferencesHaveNoFindings) {
  auto r = validate_config(parse_config(kListing), registries());
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(r.findings.empty());
}

TEST(ValidateConfig, TypoSuggestsNearestTool) {
  auto cfg = parse_config("agent:\n  name: a\n  instructions: hi\ntoolkits:\n  search:\n    activated_tools: [webqa]\n");
  auto r = validate_config(cfg, registries());
  ASSERT_FALSE(r.valid);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].kind, FindingKind::UnknownTool);
  EXPECT_EQ(r.findings[0].path, "toolkits.search.activated_tools[0]");
  ASSERT_TRUE(r.findings[0].suggestion);
  EXPECT_EQ(*r.findings[0].suggestion, "web_qa");
}

TEST(ValidateConfig, ReportsEveryViolation) {
  AgentConfig cfg = testutil::make_config("bad name");
  cfg.instructions = "  ";
  cfg.env.name = "nowhere";
  cfg.sampling.temperature = 3;
  cfg.timeouts = {10, 5, 1};
  cfg.toolkits.push_back({"nope", {}});
  auto r = validate_config(cfg, registries());
  std::set<FindingKind> kinds;
  for (const auto& f : r.findings) {
    kinds.insert(f.kind);
    EXPECT_FALSE(f.path.empty());
  }
  for (auto k : {FindingKind::InvalidName, FindingKind::EmptyInstructions, FindingKind::UnknownEnv,
                 FindingKind::InvalidSampling, FindingKind::TimeoutOrder, FindingKind::UnknownToolkit})
    EXPECT_TRUE(kinds.count(k)) << to_string(k);
}

TEST(ValidateConfig, ReportSerializesToJson) {
  auto r = validate_config_text("agent:\n  name: a\n", registries());
  auto j = r.to_json();
  EXPECT_EQ(j["valid"], false);
  EXPECT_EQ(j["findings"][0]["path"], "agent.instructions");
}

TEST(EmitConfig, AllDefaultsEmitsOnlyAgentBlock) {
  auto y = emit_config(parse_config("agent:\n  name: a\n  instructions: hi\n"));
  EXPECT_EQ(y.rfind("agent:", 0), 0u);
  for (const char* k : {"env:", "context_manager:", "toolkits:", "sampling:", "timeouts:"})
    EXPECT_EQ(y.find(k), std::string::npos) << k;
}

TEST(EmitConfig, CanonicalKeyOrder) {
  auto cfg = parse_config(kListing);
  cfg.context_manager.name = "pruning";
  cfg.sampling.max_turns = 5;
  cfg.timeouts.tool_s = 10;
  auto y = emit_config(cfg);
  std::size_t last = 0;
  for (const char* k : {"agent:", "\nenv:", "\ncontext_manager:", "\ntoolkits:", "\nsampling:", "\ntimeouts:"}) {
    auto pos = y.find(k);
    ASSERT_NE(pos, std::string::npos) << k;
    EXPECT_GE(pos, last);
    last = pos;
  }
}

TEST(EmitConfig, InvalidConfigThrows) {
  auto cfg = testutil::make_config();
  cfg.instructions = "";
  EXPECT_THROW(emit_config(cfg), ConfigError);
}

TEST(EmitConfig, ListingRoundTrips) {
  auto cfg = parse_config(kListing);
  EXPECT_EQ(parse_config(emit_config(cfg)), cfg);
}

TEST(ConfigCorpus, FortyValidConfigsValidateAndRoundTrip) {
  auto files = corpus("valid");
  ASSERT_EQ(files.size(), 40u);
  auto reg = registries();
  for (const auto& f : files) {
    const auto text = testutil::read_text(f);
    auto r = validate_config_text(text, reg);
    EXPECT_TRUE(r.valid) << f << "\n" << r.to_json().dump(2);
    auto cfg = parse_config(text);
    auto once = emit_config(cfg);
    EXPECT_EQ(parse_config(once), cfg) << f;
    EXPECT_EQ(emit_config(parse_config(once)), once) << f;
  }
}

TEST(ConfigCorpus, TwentyInvalidConfigsRejectedWithExpectedPath) {
  auto files = corpus("invalid");
  ASSERT_EQ(files.size(), 20u);
  auto reg = registries();
  for (const auto& f : files) {
    const auto text = testutil::read_text(f);
    const auto header = text.substr(0, text.find('\n'));
    std::istringstream hs(header);
    std::string hash, tag, kind, path;
    hs >> hash >> tag >> kind >> path;
    auto r = validate_config_text(text, reg);
    EXPECT_FALSE(r.valid) << f;
    bool matched = false;
    for (const auto& fd : r.findings) {
      EXPECT_FALSE(fd.path.empty()) << f;
      if (to_string(fd.kind) == kind && fd.path.rfind(path, 0) == 0) matched = true;
    }
    EXPECT_TRUE(matched) << f << " wanted " << kind << " at " << path << "\n" << r.to_json().dump(2);
  }
}

// Property: for random valid configs, parse(emit(c)) == c and emit is a fixpoint.
TEST(ConfigProperty, RandomConfigsRoundTrip) {
  std::mt19937 rng(11);
  const std::vector<std::pair<std::string, std::vector<std::string>>> kits{
      {"search", {"search", "web_qa"}}, {"file", {"read_file", "write_file"}}, {"math_eval", {"calculate"}},
      {"time", {"current_time"}},       {"shell", {"run_command"}}};
  const std::vector<std::string> texts{"plain", "multi\nline\ntext\n", "quote \" and: colon", "  leading spaces",
                                       "unicode é 日本", "trailing newline\n", "- dash start", "# hash start"};
  for (int i = 0; i < 200; ++i) {
    AgentConfig c;
    c.name = "agent_" + std::to_string(i);
    c.instructions = texts[rng() % texts.size()];
    c.env.name = std::vector<std::string>{"mock", "sandbox", "local_shell"}[rng() % 3];
    if (rng() % 2) c.env.config = Json{{"network", bool(rng() % 2)}};
    c.context_manager.name = rng() % 2 ? "base" : "pruning";
    if (c.context_manager.name == "pruning" && rng() % 2) c.context_manager.config = Json{{"token_budget", 1000 + rng() % 5000}};
    for (const auto& [k, tools] : kits) {
      if (rng() % 2) continue;
      ToolkitActivation a;
      if (rng() % 2) a.activated_tools = {tools[rng() % tools.size()]};
      if (rng() % 3 == 0) a.config = Json{{"key", "v" + std::to_string(rng() % 10)}};
      c.toolkits.push_back({k, a});
    }
    c.sampling.temperature = static_cast<double>(rng() % 21) / 10.0;
    c.sampling.max_turns = 1 + static_cast<int>(rng() % 50);
    c.sampling.max_tokens = 1 + static_cast<int>(rng() % 8192);
    c.timeouts.tool_s = 1 + rng() % 30;
    c.timeouts.step_s = c.timeouts.tool_s + rng() % 60;
    c.timeouts.episode_s = c.timeouts.step_s + rng() % 600;
    ASSERT_TRUE(validate_config(c, registries()).valid);
    auto y = emit_config(c);
    EXPECT_EQ(parse_config(y), c) << y;
    EXPECT_EQ(emit_config(parse_config(y)), y);
  }
}

// Property: every ConfigError path names a key that occurs in the input.
TEST(ConfigProperty, ErrorPathsResolveAgainstInput) {
  for (const auto& f : corpus("invalid")) {
    const auto text = testutil::read_text(f);
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      if (e.kind() == ConfigErrorKind::Syntax) continue;
      auto head = e.path().substr(0, e.path().find_first_of(".["));
      EXPECT_NE(text.find(head), std::string::npos) << f << " path " << e.path();
    }
  }
}
