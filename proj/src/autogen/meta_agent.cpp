// SPDX-License-Identifier: Apache-2.0
#include "agentkit/autogen/meta_agent.hpp"

#include <fmt/format.h>

#include "agentkit/autogen/prompts.hpp"
#include "agentkit/config/validate.hpp"
#include "agentkit/config/yaml_io.hpp"
#include "agentkit/env/mock_env.hpp"

namespace agentkit::autogen {
namespace {

struct MetaState {
  std::mutex mu;
  std::optional<config::AgentConfig> config;
  std::string yaml;
  std::size_t bounces = 0;
  std::size_t attempted = 0;
  std::size_t passed = 0;
  Json calls = Json::array();
  Json synthesized = Json::array();
  Json failed = Json::array();
  Json questions = Json::array();
};

Json string_param(const std::string& desc) { return Json{{"type", "string"}, {"description", desc}}; }

tools::ToolRegistry meta_registry(const std::shared_ptr<DialogueSession>& session, const std::shared_ptr<ToolLibrary>& lib,
                                  const std::shared_ptr<llm::Gateway>& gw, const std::shared_ptr<env::Environment>& sandbox,
                                  const std::shared_ptr<MetaState>& state, const SynthesisOptions& synthesis) {
  tools::ToolRegistry reg;

  tools::ToolDef search;
  search.name = "search_tool";
  search.description = "Search the tool library. Returns matching tools as toolkit.tool with descriptions and tags.";
  search.parameters = Json{{"type", "object"},
                           {"properties", {{"query", string_param("Capability to look for")},
                                           {"k", {{"type", "integer"}, {"minimum", 1}, {"maximum", 20}}}}},
                           {"required", {"query"}},
                           {"additionalProperties", false}};
  search.source = tools::ToolSource::builtin_pure;
  search.binding = "library.search";
  search.handler = [lib](const Json& args, const tools::ToolContext&) {
    auto hits = search_tools(*lib, args["query"].get<std::string>(), args.value("k", 5));
    if (hits.empty()) return tools::ToolOutput::ok("No matching tools in the library.");
    std::string out;
    for (const auto& e : hits) {
      out += fmt::format("- {}: {}", e.qualified(), e.description);
      if (!e.tags.empty()) out += fmt::format(" [tags: {}]", fmt::join(e.tags, ", "));
      out += "\n";
    }
    return tools::ToolOutput::ok(out);
  };
  reg.add(std::move(search), "meta");

  tools::ToolDef create;
  create.name = "create_tool";
  create.description = "Synthesize a new Python tool (signature, docstring, self-test) for a missing capability and add it to the library.";
  create.parameters = Json{{"type", "object"},
                           {"properties", {{"description", string_param("What the tool must do, including inputs and output")}}},
                           {"required", {"description"}},
                           {"additionalProperties", false}};
  create.source = tools::ToolSource::builtin_pure;
  create.binding = "autogen.synthesize_tool";
  create.handler = [lib, gw, sandbox, state, synthesis](const Json& args, const tools::ToolContext&) {
    const auto need = args["description"].get<std::string>();
    {
      std::lock_guard lock(state->mu);
      ++state->attempted;
    }
    try {
      auto tool = synthesize_tool(need, *lib, *gw, *sandbox, synthesis);
      lib->add_synthesized(tool, CreatedBy::meta_agent);
      std::lock_guard lock(state->mu);
      ++state->passed;
      state->synthesized.push_back(Json{{"tool", tool.tool.name}, {"rounds_used", tool.report.rounds_used}});
      std::vector<std::string> params;
      for (auto it = tool.tool.parameters["properties"].begin(); it != tool.tool.parameters["properties"].end(); ++it)
        params.push_back(it.key() + (it->contains("type") ? ": " + (*it)["type"].get<std::string>() : ""));
      return tools::ToolOutput::ok(fmt::format("Created tool {}({}): {}\nUse it as toolkit '{}'.", tool.tool.name,
                                               fmt::join(params, ", "), tool.tool.description, tool.tool.name));
    } catch (const SynthesisFailed& e) {
      std::lock_guard lock(state->mu);
      state->failed.push_back(Json{{"need", need}, {"rounds_used", e.report().rounds_used}, {"last_error", e.report().last_error}});
      return tools::ToolOutput::error(e.what());
    } catch (const LibraryError& e) {
      return tools::ToolOutput::error(e.what());
    }
  };
  reg.add(std::move(create), "meta");

  tools::ToolDef ask;
  ask.name = "ask_user";
  ask.description = "Ask the user a clarifying question and wait for the answer.";
  ask.parameters = Json{{"type", "object"},
                        {"properties", {{"question", string_param("The question")}}},
                        {"required", {"question"}},
                        {"additionalProperties", false}};
  ask.source = tools::ToolSource::builtin_pure;
  ask.binding = "dialogue.ask";
  ask.handler = [session, state](const Json& args, const tools::ToolContext&) {
    const auto question = args["question"].get<std::string>();
    {
      std::lock_guard lock(state->mu);
      state->questions.push_back(question);
    }
    return tools::ToolOutput::ok(session->ask(question));
  };
  reg.add(std::move(ask), "meta");

  tools::ToolDef submit;
  submit.name = "create_agent_config";
  submit.description = "Submit the final agent configuration as YAML. Returns the validation errors if it is not accepted.";
  submit.parameters = Json{{"type", "object"},
                           {"properties", {{"yaml", string_param("Complete agent configuration in YAML")}}},
                           {"required", {"yaml"}},
                           {"additionalProperties", false}};
  submit.source = tools::ToolSource::builtin_pure;
  submit.binding = "config.validate";
  submit.handler = [lib, session, state](const Json& args, const tools::ToolContext&) {
    auto report = config::validate_config_text(args["yaml"].get<std::string>(), lib->snapshot());
    if (!report.valid) {
      std::lock_guard lock(state->mu);
      ++state->bounces;
      std::string msg = "configuration rejected:";
      for (const auto& f : report.findings) {
        msg += fmt::format("\n- {}: {}", f.path.empty() ? "<document>" : f.path, f.message);
        if (f.suggestion) msg += fmt::format(" (did you mean '{}'?)", *f.suggestion);
      }
      return tools::ToolOutput::error(msg);
    }
    auto cfg = config::parse_config(args["yaml"].get<std::string>());
    auto yaml = config::emit_config(cfg);
    {
      std::lock_guard lock(state->mu);
      state->config = cfg;
      state->yaml = yaml;
    }
    session->emit(Json{{"type", "config_preview"}, {"yaml", yaml}});
    return tools::ToolOutput::ok("configuration accepted:\n" + yaml);
  };
  reg.add(std::move(submit), "meta");
  return reg;
}

}  // namespace

ScriptedDialogue::ScriptedDialogue(std::string request, std::vector<std::string> answers)
    : request_(std::move(request)), answers_(answers.begin(), answers.end()) {}

std::string ScriptedDialogue::ask(const std::string& question) {
  std::lock_guard lock(mu_);
  questions_.push_back(question);
  events_.push_back(Json{{"type", "ask_user"}, {"question", question}});
  if (answers_.empty()) throw std::runtime_error("scripted dialogue has no answer left for: " + question);
  auto a = answers_.front();
  answers_.pop_front();
  return a;
}

void ScriptedDialogue::emit(const Json& event) {
  std::lock_guard lock(mu_);
  events_.push_back(event);
}

std::vector<std::string> ScriptedDialogue::questions() const {
  std::lock_guard lock(mu_);
  return questions_;
}

std::vector<Json> ScriptedDialogue::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::pair<config::AgentConfig, GenerationReport> run_meta_agent(const std::shared_ptr<DialogueSession>& session,
                                                                const std::shared_ptr<ToolLibrary>& lib,
                                                                const std::shared_ptr<llm::Gateway>& gw,
                                                                const std::shared_ptr<env::Environment>& sandbox,
                                                                const MetaAgentOptions& options) {
  auto state = std::make_shared<MetaState>();

  config::AgentConfig architect;
  architect.name = "meta_agent";
  architect.instructions = std::string(prompts::get("meta_agent"));
  architect.sampling.temperature = options.temperature;
  architect.sampling.max_turns = options.max_turns;
  architect.timeouts = options.timeouts;

  runtime::RuntimeDeps deps;
  deps.gateway = gw;
  deps.cancel = options.cancel;
  deps.env_factory = [](const config::EnvSpec&, const env::EnvOptions& o) {
    return std::make_shared<env::MockEnvironment>(std::vector<env::MockRule>{}, o.max_timeout_s);
  };
  const auto synthesis = options.synthesis;
  deps.registry_factory = [session, lib, gw, sandbox, state, synthesis](const config::AgentConfig&,
                                                                         const std::shared_ptr<env::Environment>&) {
    return meta_registry(session, lib, gw, sandbox, state, synthesis);
  };
  deps.on_turn = [session, state](const runtime::Turn& t) {
    if (t.is_assistant()) {
      const auto content = t.payload.value("content", "");
      if (!content.empty()) session->emit(Json{{"type", "assistant_delta"}, {"text", content}});
      return;
    }
    if (t.kind == runtime::TurnKind::tool_result) {
      {
        std::lock_guard lock(state->mu);
        state->calls.push_back(Json{{"tool", t.payload.value("tool_name", "")}, {"status", t.payload.value("status", "")}});
      }
      session->emit(Json{{"type", "tool_event"},
                         {"tool", t.payload.value("tool_name", "")},
                         {"status", t.payload.value("status", "")},
                         {"content", t.payload.value("content", "")}});
    }
  };
  deps.finish_check = [state]() -> std::optional<std::string> {
    std::lock_guard lock(state->mu);
    if (state->config) return state->yaml;
    return std::nullopt;
  };

  auto traj = runtime::run_episode(architect, session->request(), deps);

  GenerationReport report;
  report.mode = "meta_agent";
  report.description = session->request();
  std::lock_guard lock(state->mu);
  report.tools_attempted = state->attempted;
  report.tools_passed = state->passed;
  report.validation_bounces = state->bounces;
  report.stages.push_back(Json{{"stage", 0},
                               {"name", "architect"},
                               {"artifact",
                                {{"tool_calls", state->calls},
                                 {"questions", state->questions},
                                 {"synthesized", state->synthesized},
                                 {"failed", state->failed},
                                 {"termination", runtime::to_string(traj.termination)},
                                 {"turns", traj.turns.size()}}}});
  if (!state->config) {
    std::string why = fmt::format("architect ended with {} and no accepted configuration", runtime::to_string(traj.termination));
    if (!traj.error.empty()) why += ": " + traj.error;
    session->emit(Json{{"type", "failed"}, {"error", why}});
    throw GenerationError("no_config", why);
  }
  report.config_valid = true;
  report.config_yaml = state->yaml;
  session->emit(Json{{"type", "done"}, {"yaml", state->yaml}});
  return {*state->config, report};
}

}  // namespace agentkit::autogen
