// SPDX-License-Identifier: Apache-2.0
#include "agentkit/autogen/synthesis.hpp"

#include <fmt/format.h>

#include <regex>
#include <sstream>

#include "agentkit/autogen/prompts.hpp"
#include "agentkit/common/text.hpp"

namespace agentkit::autogen {
namespace {

/// Splits at depth-0 occurrences of `sep`, ignoring brackets and quoted strings.
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  char quote = 0;
  for (char c : s) {
    if (quote) {
      cur += c;
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '"' || c == '\'') quote = c;
    else if (c == '(' || c == '[' || c == '{') ++depth;
    else if (c == ')' || c == ']' || c == '}') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    cur += c;
  }
  out.push_back(cur);
  return out;
}

std::string json_type_for(std::string ann) {
  ann = text::trim(ann);
  static const std::regex optional(R"(^(?:typing\.)?Optional\[(.*)\]$)");
  std::smatch m;
  if (std::regex_match(ann, m, optional)) ann = text::trim(m[1].str());
  auto base = ann.substr(0, ann.find('['));
  if (auto dot = base.rfind('.'); dot != std::string::npos) base = base.substr(dot + 1);
  if (base == "str") return "string";
  if (base == "int") return "integer";
  if (base == "float") return "number";
  if (base == "bool") return "boolean";
  if (base == "list" || base == "List" || base == "tuple" || base == "Tuple" || base == "Sequence") return "array";
  if (base == "dict" || base == "Dict" || base == "Mapping") return "object";
  return {};
}

std::string python_blocks_error(const std::vector<text::FencedBlock>& blocks) {
  std::size_t n = 0;
  for (const auto& b : blocks) n += (text::to_lower(b.info) == "python" || text::to_lower(b.info) == "py") ? 1 : 0;
  return fmt::format("reply needs two fenced python blocks (tool, then self-test), found {}", n);
}

}  // namespace

SynthesisFailed::SynthesisFailed(SynthesizedTool attempt, const std::string& message)
    : GenerationError("tools", message), attempt_(std::move(attempt)) {}

std::optional<PySignature> parse_python_function(const std::string& source) {
  static const std::regex def_re(R"((?:^|\n)(?:async\s+)?def\s+([A-Za-z_]\w*)\s*\()");
  std::smatch m;
  if (!std::regex_search(source, m, def_re)) return std::nullopt;
  PySignature sig;
  sig.name = m[1].str();
  std::size_t pos = static_cast<std::size_t>(m.position(0) + m.length(0));
  int depth = 1;
  std::size_t start = pos;
  char quote = 0;
  for (; pos < source.size() && depth > 0; ++pos) {
    char c = source[pos];
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '"' || c == '\'') quote = c;
    else if (c == '(' || c == '[' || c == '{') ++depth;
    else if (c == ')' || c == ']' || c == '}') --depth;
  }
  if (depth != 0) return std::nullopt;
  const std::string params = source.substr(start, pos - 1 - start);
  auto colon = source.find(':', pos);
  if (colon == std::string::npos) return std::nullopt;
  auto between = text::trim(std::string_view(source).substr(pos, colon - pos));
  if (between.rfind("->", 0) == 0) sig.return_annotation = text::trim(between.substr(2));

  for (auto& raw : split_top(params, ',')) {
    auto p = text::trim(raw);
    if (p.empty() || p == "self" || p == "/" || p == "*" || p[0] == '*') continue;
    PyParam param;
    auto eq = split_top(p, '=');
    param.has_default = eq.size() > 1;
    auto ann = split_top(eq[0], ':');
    param.name = text::trim(ann[0]);
    if (ann.size() > 1) param.annotation = text::trim(ann[1]);
    sig.params.push_back(std::move(param));
  }

  // Docstring: first statement of the body.
  auto body_start = source.find('\n', colon);
  if (body_start != std::string::npos) {
    auto rest = source.substr(body_start + 1);
    auto first = rest.find_first_not_of(" \t\r\n");
    if (first != std::string::npos) {
      for (const char* q : {"\"\"\"", "'''"}) {
        if (rest.compare(first, 3, q) != 0) continue;
        auto close = rest.find(q, first + 3);
        if (close == std::string::npos) break;
        const std::string doc = rest.substr(first + 3, close - first - 3);
        std::istringstream lines(doc);
        std::string line;
        bool in_args = false;
        std::string current;
        static const std::regex arg_re(R"(^\s*([A-Za-z_]\w*)\s*(?:\([^)]*\))?\s*:\s*(.*)$)");
        while (std::getline(lines, line)) {
          auto t = text::trim(line);
          if (sig.summary.empty()) {
            if (!t.empty()) sig.summary = t;
            continue;
          }
          if (t == "Args:" || t == "Arguments:" || t == "Parameters:") {
            in_args = true;
            continue;
          }
          if (!in_args) continue;
          if (t == "Returns:" || t == "Raises:" || t == "Example:" || t == "Examples:") {
            in_args = false;
            continue;
          }
          std::smatch am;
          if (std::regex_match(line, am, arg_re)) {
            current = am[1].str();
            sig.arg_docs[current] = text::trim(am[2].str());
          } else if (!current.empty() && !t.empty()) {
            sig.arg_docs[current] += " " + t;
          }
        }
        break;
      }
    }
  }
  return sig;
}

Json schema_from_signature(const PySignature& sig) {
  Json props = Json::object();
  Json required = Json::array();
  for (const auto& p : sig.params) {
    Json s = Json::object();
    if (auto t = json_type_for(p.annotation); !t.empty()) s["type"] = t;
    if (auto it = sig.arg_docs.find(p.name); it != sig.arg_docs.end() && !it->second.empty()) s["description"] = it->second;
    props[p.name] = s;
    if (!p.has_default) required.push_back(p.name);
  }
  Json schema{{"type", "object"}, {"properties", props}};
  if (!required.empty()) schema["required"] = required;
  schema["additionalProperties"] = false;
  return schema;
}

SynthesizedTool synthesize_tool(const std::string& need, const ToolLibrary& lib, llm::Gateway& gw, env::Environment& sandbox,
                                const SynthesisOptions& options) {
  if (text::trim(need).empty()) throw std::invalid_argument("synthesize_tool needs a nonempty need");
  std::string existing;
  for (const auto& e : lib.entries()) existing += "- " + e.qualified() + ": " + e.description + "\n";
  if (existing.empty()) existing = "(none)\n";

  llm::ChatRequest req;
  req.temperature = options.temperature.value_or(0.2);
  req.messages.push_back(llm::Message::user(
      text::render_template(prompts::get("synthesize_tool"), {{"need", need}, {"existing", existing}})));

  SynthesizedTool attempt;
  attempt.tool.source = tools::ToolSource::synthesized;
  const double timeout = std::min(options.test_timeout_s, sandbox.max_timeout_s());

  for (int round = 1; round <= options.max_rounds; ++round) {
    attempt.report.rounds_used = round;
    llm::ChatResponse resp;
    try {
      resp = gw.complete(req);
    } catch (const std::exception& e) {
      attempt.report.last_error = std::string("model call failed: ") + e.what();
      throw SynthesisFailed(attempt, attempt.report.last_error);
    }
    const std::string reply = resp.content.value_or("");
    std::string error;

    auto blocks = text::fenced_blocks(reply);
    std::vector<std::string> python;
    std::vector<std::string> tags;
    for (const auto& b : blocks) {
      const auto info = text::to_lower(b.info);
      if (info == "python" || info == "py") python.push_back(b.body);
      else if (info == "json") {
        try {
          auto j = Json::parse(b.body);
          if (j.is_object() && j.contains("tags")) tags = j["tags"].get<std::vector<std::string>>();
        } catch (const std::exception&) {
        }
      }
    }
    std::optional<PySignature> sig;
    if (python.size() < 2) {
      error = python_blocks_error(blocks);
    } else {
      attempt.source_code = python[0];
      attempt.self_test = python[1];
      sig = parse_python_function(attempt.source_code);
      if (!sig) error = "the tool block has no top-level def";
    }
    if (error.empty()) {
      attempt.tool.name = sig->name;
      attempt.tool.description = sig->summary.empty() ? need : sig->summary;
      attempt.tool.parameters = schema_from_signature(*sig);
      attempt.tool.binding = "script:" + sig->name;
      attempt.tags = tags;
      if (lib.has_tool_name(sig->name)) {
        error = "a tool named '" + sig->name + "' already exists in the library; choose another name";
      } else if (auto problem = tools::check_parameter_schema(attempt.tool.parameters); !problem.empty()) {
        error = problem;
      }
    }
    if (error.empty()) {
      env::ExecResult r;
      try {
        r = sandbox.exec_code(attempt.source_code + "\n\n" + attempt.self_test + "\n", timeout);
      } catch (const env::EnvError& e) {
        attempt.report.last_error = e.what();
        throw SynthesisFailed(attempt, std::string("sandbox unavailable: ") + e.what());
      }
      if (r.exit_code == 0) {
        attempt.report.passed = true;
        attempt.report.last_error.clear();
        return attempt;
      }
      error = r.timed_out() ? fmt::format("self-test timed out after {}s", timeout)
                            : fmt::format("{}\n[exit code: {}]", r.render(), r.exit_code);
    }
    attempt.report.last_error = error;
    if (round == options.max_rounds) break;
    req.messages.push_back(llm::Message::assistant(reply));
    req.messages.push_back(llm::Message::user(text::render_template(
        prompts::get("repair_tool"), {{"round", std::to_string(round)},
                                      {"max_rounds", std::to_string(options.max_rounds)},
                                      {"source", attempt.source_code},
                                      {"test", attempt.self_test},
                                      {"error", error}})));
  }
  throw SynthesisFailed(attempt, fmt::format("self-test still failing after {} rounds: {}", attempt.report.rounds_used,
                                             text::truncate_utf8(attempt.report.last_error, 500)));
}

std::string script_for_call(const SynthesizedTool& tool, const Json& args) {
  return fmt::format(
      "{}\n\nimport json as _ak_json\n_ak_args = _ak_json.loads({})\n_ak_result = {}(**_ak_args)\n"
      "print(_ak_result if isinstance(_ak_result, str) else _ak_json.dumps(_ak_result))\n",
      tool.source_code, Json(args.dump()).dump(), tool.tool.name);
}

tools::ToolkitFactory script_toolkit(const SynthesizedTool& tool) {
  tools::ToolkitFactory f;
  f.description = tool.tool.description;
  f.tools = {tool.tool.name};
  f.needs_env = true;
  f.make = [tool](const Json&, const std::shared_ptr<env::Environment>& env) {
    if (!env) throw tools::BindingError("synthesized tool '" + tool.tool.name + "' needs an environment");
    tools::ToolDef def = tool.tool;
    def.source = tools::ToolSource::synthesized;
    def.test_report = Json{{"passed", tool.report.passed}, {"rounds_used", tool.report.rounds_used}};
    def.handler = [tool, env](const Json& args, const tools::ToolContext& ctx) {
      auto r = env->exec_code(script_for_call(tool, args), std::max(0.001, ctx.remaining_s()));
      if (r.timed_out()) return tools::ToolOutput{tools::ToolStatus::timeout, r.render()};
      if (r.exit_code != 0) return tools::ToolOutput::error(fmt::format("{}\n[exit code: {}]", r.render(), r.exit_code));
      std::string out = r.render();
      if (!out.empty() && out.back() == '\n' && !r.truncated) out.pop_back();
      return tools::ToolOutput::ok(out);
    };
    return std::vector<tools::ToolDef>{std::move(def)};
  };
  return f;
}

}  // namespace agentkit::autogen
