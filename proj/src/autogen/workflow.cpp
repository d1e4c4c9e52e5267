// SPDX-License-Identifier: Apache-2.0
#include "agentkit/autogen/workflow.hpp"

#include <fmt/format.h>

#include <cctype>
#include <set>

#include "agentkit/autogen/prompts.hpp"
#include "agentkit/common/text.hpp"
#include "agentkit/config/validate.hpp"
#include "agentkit/config/yaml_io.hpp"

namespace agentkit::autogen {
namespace {

std::vector<std::string> string_list(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  if (!j[key].is_array()) throw std::invalid_argument(std::string(key) + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw std::invalid_argument(std::string(key) + " must be a list of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

Json extract_json(const std::string& reply) {
  if (auto block = text::first_fenced(reply, "json")) return Json::parse(*block);
  auto t = text::trim(reply);
  auto b = t.find('{');
  auto e = t.rfind('}');
  if (b == std::string::npos || e == std::string::npos || e < b) throw std::invalid_argument("no JSON object in reply");
  return Json::parse(t.substr(b, e - b + 1));
}

std::set<std::string> entry_tokens(const LibraryEntry& e) {
  auto toks = text::search_token_set(e.name);
  for (const auto& t : e.tags)
    for (const auto& x : text::search_token_set(t)) toks.insert(x);
  return toks;
}

}  // namespace

Json to_json(const RequirementSpec& s) {
  return Json{{"objective", s.objective},
              {"required_capabilities", s.required_capabilities},
              {"env_constraints", s.env_constraints},
              {"open_questions", s.open_questions}};
}

RequirementSpec requirement_spec_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("requirement spec must be a JSON object");
  RequirementSpec s;
  if (!j.contains("objective") || !j["objective"].is_string()) throw std::invalid_argument("objective must be a string");
  s.objective = text::trim(j["objective"].get<std::string>());
  if (s.objective.empty()) throw std::invalid_argument("objective is empty");
  s.required_capabilities = string_list(j, "required_capabilities");
  s.env_constraints = string_list(j, "env_constraints");
  s.open_questions = string_list(j, "open_questions");
  return s;
}

Json GenerationReport::to_json() const {
  return Json{{"mode", mode},
              {"description", description},
              {"stages", stages},
              {"config_valid", config_valid},
              {"tools_attempted", tools_attempted},
              {"tools_passed", tools_passed},
              {"validation_bounces", validation_bounces},
              {"config_yaml", config_yaml}};
}

RequirementSpec clarify(const std::string& description, llm::Gateway& gw) {
  if (text::trim(description).empty()) throw std::invalid_argument("clarify needs a nonempty description");
  llm::ChatRequest req;
  req.temperature = 0.2;
  req.messages.push_back(
      llm::Message::user(text::render_template(prompts::get("clarify"), {{"description", description}})));
  std::string error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    llm::ChatResponse resp;
    try {
      resp = gw.complete(req);
    } catch (const std::exception& e) {
      throw GenerationError("clarify", std::string("model call failed: ") + e.what());
    }
    const auto reply = resp.content.value_or("");
    try {
      return requirement_spec_from_json(extract_json(reply));
    } catch (const std::exception& e) {
      error = e.what();
    }
    req.messages.push_back(llm::Message::assistant(reply));
    req.messages.push_back(llm::Message::user(text::render_template(prompts::get("clarify_retry"), {{"error", error}})));
  }
  throw GenerationError("clarify", "unusable requirement spec: " + error);
}

std::string agent_name_from(const std::string& objective) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : objective) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += c;
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  std::string name;
  for (std::size_t i = 0; i < words.size() && i < 3; ++i) {
    auto w = text::to_lower(words[i]);
    w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    name += w + "_";
  }
  return name + "Agent";
}

std::pair<config::AgentConfig, GenerationReport> generate_workflow(const std::string& description, ToolLibrary& lib,
                                                                   llm::Gateway& gw, env::Environment& sandbox,
                                                                   const WorkflowOptions& options) {
  GenerationReport report;
  report.mode = "workflow";
  report.description = description;

  // Stage 1
  const RequirementSpec spec = clarify(description, gw);
  report.stages.push_back(Json{{"stage", 1}, {"name", "clarify"}, {"artifact", to_json(spec)}});

  // Stage 2
  std::vector<std::pair<std::string, std::vector<std::string>>> toolkits;
  auto select = [&](const std::string& toolkit, const std::string& tool) {
    for (auto& [tk, names] : toolkits) {
      if (tk != toolkit) continue;
      if (!tool.empty() && std::find(names.begin(), names.end(), tool) == names.end()) names.push_back(tool);
      return;
    }
    toolkits.push_back({toolkit, tool.empty() ? std::vector<std::string>{} : std::vector<std::string>{tool}});
  };
  Json retrieved = Json::array();
  Json synthesized = Json::array();
  Json failed = Json::array();
  std::vector<std::string> tool_lines;
  for (const auto& cap : spec.required_capabilities) {
    const auto cap_tokens = text::search_token_set(cap);
    std::optional<LibraryEntry> hit;
    for (auto& e : search_tools(lib, cap, options.retrieve_k)) {
      auto toks = entry_tokens(e);
      if (std::any_of(cap_tokens.begin(), cap_tokens.end(), [&](const std::string& t) { return toks.count(t) > 0; })) {
        hit = std::move(e);
        break;
      }
    }
    if (hit) {
      retrieved.push_back(Json{{"capability", cap}, {"tool", hit->qualified()}});
      select(hit->toolkit, hit->synthesized ? std::string() : hit->name);
      tool_lines.push_back("- " + hit->name + ": " + hit->description);
      continue;
    }
    ++report.tools_attempted;
    const std::string need = fmt::format("{} (capability: {})", spec.objective, cap);
    try {
      auto tool = synthesize_tool(need, lib, gw, sandbox, options.synthesis);
      lib.add_synthesized(tool, CreatedBy::workflow);
      ++report.tools_passed;
      synthesized.push_back(Json{{"capability", cap}, {"tool", tool.tool.name}, {"rounds_used", tool.report.rounds_used}});
      select(tool.tool.name, "");
      tool_lines.push_back("- " + tool.tool.name + ": " + tool.tool.description);
    } catch (const SynthesisFailed& e) {
      failed.push_back(Json{{"capability", cap},
                            {"rounds_used", e.report().rounds_used},
                            {"last_error", e.report().last_error}});
    } catch (const LibraryError& e) {
      failed.push_back(Json{{"capability", cap}, {"error", e.what()}});
    }
  }
  report.stages.push_back(Json{{"stage", 2},
                               {"name", "tools"},
                               {"artifact", {{"retrieved", retrieved}, {"synthesized", synthesized}, {"failed", failed}}}});

  // Stage 3
  std::string tools_text;
  for (const auto& l : tool_lines) tools_text += l + "\n";
  if (tools_text.empty()) tools_text = "(none)\n";
  std::string constraints;
  for (const auto& c : spec.env_constraints) constraints += "- " + c + "\n";
  if (constraints.empty()) constraints = "(none)\n";
  llm::ChatRequest req;
  req.temperature = 0.2;
  req.messages.push_back(llm::Message::user(text::render_template(
      prompts::get("instructions"), {{"objective", spec.objective}, {"tools", tools_text}, {"constraints", constraints}})));
  std::string instructions;
  try {
    auto reply = gw.complete(req).content.value_or("");
    auto blocks = text::fenced_blocks(reply);
    instructions = blocks.size() == 1 && text::trim(reply).rfind("```", 0) == 0 ? blocks[0].body : reply;
    instructions = text::trim(instructions);
  } catch (const std::exception& e) {
    throw GenerationError("instructions", std::string("model call failed: ") + e.what());
  }
  report.stages.push_back(Json{{"stage", 3}, {"name", "instructions"}, {"artifact", instructions}});

  // Stage 4
  config::AgentConfig cfg;
  cfg.name = agent_name_from(spec.objective);
  cfg.instructions = instructions.empty() ? instructions : instructions + "\n";
  bool needs_env = false;
  for (const auto& [tk, names] : toolkits) {
    config::ToolkitActivation act;
    act.activated_tools = names;
    cfg.toolkits.emplace_back(tk, act);
    auto entry = lib.find(tk);
    if (tk == "python_executor" || tk == "shell" || tk == "file" || tk == "env_state" || (entry && entry->synthesized))
      needs_env = true;
  }
  if (needs_env) cfg.env = config::EnvSpec{"sandbox", Json::object()};

  auto validation = config::validate_config(cfg, lib.snapshot());
  report.config_valid = validation.valid;
  Json artifact{{"findings", validation.to_json()["findings"]}};
  if (validation.valid) {
    report.config_yaml = config::emit_config(cfg);
    artifact["yaml"] = report.config_yaml;
  }
  report.stages.push_back(Json{{"stage", 4}, {"name", "assemble"}, {"artifact", artifact}});
  if (!validation.valid) {
    std::string msg = "assembled config is invalid";
    for (const auto& f : validation.findings) msg += "; " + f.path + ": " + f.message;
    throw GenerationError("assemble", msg);
  }
  return {cfg, report};
}

}  // namespace agentkit::autogen
