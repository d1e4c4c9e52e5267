// SPDX-License-Identifier: Apache-2.0
#include "agentkit/config/yaml_io.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <regex>
#include <set>
#include <sstream>

#include "agentkit/common/hash.hpp"
#include "agentkit/common/text.hpp"
#include "agentkit/config/validate.hpp"

namespace agentkit::config {

const char* to_string(ConfigErrorKind kind) {
  switch (kind) {
    case ConfigErrorKind::Syntax: return "SyntaxError";
    case ConfigErrorKind::Schema: return "SchemaError";
    case ConfigErrorKind::UnknownComponent: return "UnknownComponent";
    case ConfigErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "ConfigError";
}

ConfigError::ConfigError(ConfigErrorKind kind, std::string path, const std::string& message, int line)
    : Error(fmt::format("{} at '{}': {}", to_string(kind), path.empty() ? "<root>" : path, message)),
      kind_(kind),
      path_(std::move(path)),
      detail_(message),
      line_(line) {}

const ToolkitActivation* AgentConfig::find_toolkit(const std::string& toolkit) const {
  for (const auto& [name, activation] : toolkits) {
    if (name == toolkit) return &activation;
  }
  return nullptr;
}

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : -1; }

[[noreturn]] void schema_error(const std::string& path, const std::string& message, const YAML::Node& node) {
  throw ConfigError(ConfigErrorKind::Schema, path, message, line_of(node));
}

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

bool is_null(const YAML::Node& node) { return !node.IsDefined() || node.IsNull(); }

void expect_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) schema_error(path, "expected a mapping", node);
}

std::string scalar_string(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) schema_error(path, "expected a string", node);
  return node.Scalar();
}

double scalar_number(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) schema_error(path, "expected a number", node);
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    schema_error(path, "expected a number, got '" + node.Scalar() + "'", node);
  }
}

int scalar_int(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) schema_error(path, "expected an integer", node);
  static const std::regex kInt(R"([-+]?[0-9]+)");
  if (!std::regex_match(node.Scalar(), kInt)) {
    schema_error(path, "expected an integer, got '" + node.Scalar() + "'", node);
  }
  try {
    return node.as<int>();
  } catch (const YAML::Exception&) {
    schema_error(path, "integer out of range", node);
  }
}

Json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted scalars stay strings
  static const std::set<std::string> kNull{"", "~", "null", "Null", "NULL"};
  static const std::set<std::string> kTrue{"true", "True", "TRUE"};
  static const std::set<std::string> kFalse{"false", "False", "FALSE"};
  static const std::regex kInt(R"([-+]?[0-9]+)");
  static const std::regex kFloat(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
  if (kNull.count(s)) return nullptr;
  if (kTrue.count(s)) return true;
  if (kFalse.count(s)) return false;
  if (std::regex_match(s, kInt)) {
    try {
      return std::stoll(s);
    } catch (const std::out_of_range&) {
      return s;
    }
  }
  if (std::regex_match(s, kFloat)) return std::stod(s);
  return s;
}

Json yaml_to_json(const YAML::Node& node, const std::string& path) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      Json arr = Json::array();
      std::size_t i = 0;
      for (const auto& item : node) arr.push_back(yaml_to_json(item, fmt::format("{}[{}]", path, i++)));
      return arr;
    }
    case YAML::NodeType::Map: {
      Json obj = Json::object();
      for (const auto& kv : node) {
        auto key = scalar_string(kv.first, path);
        if (obj.contains(key)) schema_error(join_path(path, key), "duplicate key", kv.first);
        obj[key] = yaml_to_json(kv.second, join_path(path, key));
      }
      return obj;
    }
  }
  return nullptr;
}

Json options_map(const YAML::Node& node, const std::string& path) {
  if (is_null(node)) return Json::object();
  expect_map(node, path);
  return yaml_to_json(node, path);
}

/// Iterates a mapping, rejecting duplicate and unexpected keys.
template <class Fn>
void for_each_key(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed, Fn&& fn) {
  std::set<std::string> seen;
  for (const auto& kv : node) {
    auto key = scalar_string(kv.first, path);
    auto key_path = join_path(path, key);
    if (!seen.insert(key).second) schema_error(key_path, "duplicate key", kv.first);
    if (!allowed.empty() && !allowed.count(key)) schema_error(key_path, "unknown key '" + key + "'", kv.first);
    fn(key, kv.second, key_path);
  }
}

ComponentSpec parse_component(const YAML::Node& node, const std::string& path) {
  ComponentSpec spec;
  if (is_null(node)) schema_error(path, "expected a mapping with 'name'", node);
  expect_map(node, path);
  bool has_name = false;
  for_each_key(node, path, {"name", "config"}, [&](const std::string& key, const YAML::Node& v, const std::string& p) {
    if (key == "name") {
      spec.name = scalar_string(v, p);
      has_name = true;
    } else {
      spec.config = options_map(v, p);
    }
  });
  if (!has_name) schema_error(join_path(path, "name"), "missing required field", node);
  return spec;
}

ToolkitActivation parse_activation(const YAML::Node& node, const std::string& path) {
  ToolkitActivation act;
  if (is_null(node)) return act;
  expect_map(node, path);
  for_each_key(node, path, {"activated_tools", "config"},
               [&](const std::string& key, const YAML::Node& v, const std::string& p) {
                 if (key == "config") {
                   act.config = options_map(v, p);
                   return;
                 }
                 if (is_null(v)) return;
                 if (!v.IsSequence()) schema_error(p, "expected a list of tool names", v);
                 std::size_t i = 0;
                 for (const auto& item : v) {
                   act.activated_tools.push_back(scalar_string(item, fmt::format("{}[{}]", p, i++)));
                 }
               });
  return act;
}

}  // namespace

AgentConfig parse_config(std::string_view yaml_text, std::vector<std::string>* warnings) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(ConfigErrorKind::Syntax, "", e.msg, e.mark.line >= 0 ? e.mark.line + 1 : -1);
  } catch (const YAML::Exception& e) {
    throw ConfigError(ConfigErrorKind::Syntax, "", e.what());
  }
  if (is_null(root)) throw ConfigError(ConfigErrorKind::Schema, "", "document is empty");
  expect_map(root, "");

  AgentConfig cfg;
  bool has_agent = false;
  for_each_key(
      root, "", {"agent", "env", "context_manager", "toolkits", "sampling", "timeouts"},
      [&](const std::string& key, const YAML::Node& v, const std::string& path) {
        if (key == "agent") {
          has_agent = true;
          expect_map(v, path);
          bool has_name = false, has_instructions = false;
          for_each_key(v, path, {"name", "instructions"},
                       [&](const std::string& k, const YAML::Node& f, const std::string& p) {
                         if (k == "name") {
                           cfg.name = scalar_string(f, p);
                           has_name = true;
                         } else {
                           cfg.instructions = scalar_string(f, p);
                           has_instructions = true;
                         }
                       });
          if (!has_name) schema_error("agent.name", "missing required field", v);
          if (!has_instructions) schema_error("agent.instructions", "missing required field", v);
        } else if (key == "env") {
          cfg.env = parse_component(v, path);
        } else if (key == "context_manager") {
          cfg.context_manager = parse_component(v, path);
        } else if (key == "toolkits") {
          if (is_null(v)) return;
          expect_map(v, path);
          for_each_key(v, path, {}, [&](const std::string& k, const YAML::Node& f, const std::string& p) {
            cfg.toolkits.emplace_back(k, parse_activation(f, p));
          });
        } else if (key == "sampling") {
          if (is_null(v)) return;
          expect_map(v, path);
          for_each_key(v, path, {"temperature", "max_turns", "max_tokens"},
                       [&](const std::string& k, const YAML::Node& f, const std::string& p) {
                         if (k == "temperature") cfg.sampling.temperature = scalar_number(f, p);
                         if (k == "max_turns") cfg.sampling.max_turns = scalar_int(f, p);
                         if (k == "max_tokens") cfg.sampling.max_tokens = scalar_int(f, p);
                       });
        } else if (key == "timeouts") {
          if (is_null(v)) return;
          expect_map(v, path);
          for_each_key(v, path, {"tool_s", "step_s", "episode_s"},
                       [&](const std::string& k, const YAML::Node& f, const std::string& p) {
                         double value = scalar_number(f, p);
                         if (k == "tool_s") cfg.timeouts.tool_s = value;
                         if (k == "step_s") cfg.timeouts.step_s = value;
                         if (k == "episode_s") cfg.timeouts.episode_s = value;
                       });
        }
      });
  if (!has_agent) throw ConfigError(ConfigErrorKind::Schema, "agent", "missing required block");

  if (auto alias = env_aliases().find(cfg.env.name); alias != env_aliases().end()) {
    auto msg = fmt::format("env '{}' is a cloud backend; using local '{}' instead", cfg.env.name, alias->second);
    spdlog::warn(msg);
    if (warnings) warnings->push_back(msg);
    cfg.env.name = alias->second;
  }
  if (!builtin_env_backends().count(cfg.env.name)) {
    throw ConfigError(ConfigErrorKind::UnknownComponent, "env.name", "unknown env backend '" + cfg.env.name + "'");
  }
  if (!builtin_context_managers().count(cfg.context_manager.name)) {
    throw ConfigError(ConfigErrorKind::UnknownComponent, "context_manager.name",
                      "unknown context manager '" + cfg.context_manager.name + "'");
  }

  auto findings = structural_findings(cfg);
  if (!findings.empty()) {
    throw ConfigError(ConfigErrorKind::Schema, findings.front().path, findings.front().message);
  }
  return cfg;
}

namespace {

bool is_reserved_word(const std::string& s) {
  static const std::set<std::string> kWords{"true", "false", "null", "yes", "no", "on", "off", "y", "n", "~"};
  return kWords.count(text::to_lower(s)) > 0;
}

std::string quoted(const std::string& s) { return Json(s).dump(); }

std::string scalar(const std::string& s) {
  static const std::regex kPlain(R"([A-Za-z_][A-Za-z0-9_./-]*)");
  if (std::regex_match(s, kPlain) && !is_reserved_word(s)) return s;
  return quoted(s);
}

bool literal_block_safe(const std::string& s) {
  if (s.find('\n') == std::string::npos) return false;
  if (s.front() == ' ' || s.front() == '\t' || s.front() == '\n') return false;
  for (unsigned char c : s) {
    if (c == '\n' || c == '\t') continue;
    if (c < 0x20 || c == 0x7f) return false;
  }
  return true;
}

void emit_text_field(std::ostringstream& out, const std::string& key, const std::string& value,
                     const std::string& indent) {
  if (!literal_block_safe(value)) {
    out << indent << key << ": " << scalar(value) << '\n';
    return;
  }
  std::size_t trailing = 0;
  while (trailing < value.size() && value[value.size() - 1 - trailing] == '\n') ++trailing;
  const char* chomp = trailing == 0 ? "|-" : (trailing == 1 ? "|" : "|+");
  out << indent << key << ": " << chomp << '\n';
  std::string body = value.substr(0, value.size() - trailing);
  std::size_t start = 0;
  while (true) {
    std::size_t nl = body.find('\n', start);
    std::string line = body.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    if (line.empty()) {
      out << '\n';
    } else {
      out << indent << "  " << line << '\n';
    }
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  for (std::size_t i = 1; i < trailing; ++i) out << '\n';
}

std::string number(double v) { return fmt::format("{}", v); }

/// JSON text in YAML flow style (", " and ": " separators).
std::string flow(const Json& j) {
  switch (j.type()) {
    case Json::value_t::object: {
      std::string s = "{";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) s += ", ";
        first = false;
        s += quoted(k) + ": " + flow(v);
      }
      return s + "}";
    }
    case Json::value_t::array: {
      std::string s = "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) s += ", ";
        first = false;
        s += flow(v);
      }
      return s + "]";
    }
    default:
      return j.dump();
  }
}

void emit_component(std::ostringstream& out, const std::string& key, const ComponentSpec& spec,
                    const ComponentSpec& defaults) {
  if (spec == defaults) return;
  out << key << ":\n";
  out << "  name: " << scalar(spec.name) << '\n';
  if (!spec.config.empty()) out << "  config: " << flow(spec.config) << '\n';
}

}  // namespace

std::string emit_config_unchecked(const AgentConfig& cfg) {
  const AgentConfig defaults;
  std::ostringstream out;
  out << "agent:\n";
  out << "  name: " << scalar(cfg.name) << '\n';
  emit_text_field(out, "instructions", cfg.instructions, "  ");
  emit_component(out, "env", cfg.env, defaults.env);
  emit_component(out, "context_manager", cfg.context_manager, defaults.context_manager);
  if (!cfg.toolkits.empty()) {
    out << "toolkits:\n";
    for (const auto& [name, act] : cfg.toolkits) {
      if (act.activated_tools.empty() && act.config.empty()) {
        out << "  " << scalar(name) << ": {}\n";
        continue;
      }
      out << "  " << scalar(name) << ":\n";
      if (!act.activated_tools.empty()) {
        out << "    activated_tools: [";
        for (std::size_t i = 0; i < act.activated_tools.size(); ++i) {
          if (i) out << ", ";
          out << scalar(act.activated_tools[i]);
        }
        out << "]\n";
      }
      if (!act.config.empty()) out << "    config: " << flow(act.config) << '\n';
    }
  }
  if (cfg.sampling != defaults.sampling) {
    out << "sampling:\n";
    if (cfg.sampling.temperature != defaults.sampling.temperature)
      out << "  temperature: " << number(cfg.sampling.temperature) << '\n';
    if (cfg.sampling.max_turns != defaults.sampling.max_turns) out << "  max_turns: " << cfg.sampling.max_turns << '\n';
    if (cfg.sampling.max_tokens != defaults.sampling.max_tokens)
      out << "  max_tokens: " << cfg.sampling.max_tokens << '\n';
  }
  if (cfg.timeouts != defaults.timeouts) {
    out << "timeouts:\n";
    if (cfg.timeouts.tool_s != defaults.timeouts.tool_s) out << "  tool_s: " << number(cfg.timeouts.tool_s) << '\n';
    if (cfg.timeouts.step_s != defaults.timeouts.step_s) out << "  step_s: " << number(cfg.timeouts.step_s) << '\n';
    if (cfg.timeouts.episode_s != defaults.timeouts.episode_s)
      out << "  episode_s: " << number(cfg.timeouts.episode_s) << '\n';
  }
  return out.str();
}

std::string emit_config(const AgentConfig& cfg) {
  auto findings = structural_findings(cfg);
  if (!findings.empty()) {
    throw ConfigError(ConfigErrorKind::InvalidConfig, findings.front().path, findings.front().message);
  }
  return emit_config_unchecked(cfg);
}

std::string config_fingerprint(const AgentConfig& cfg) {
  return sha256_hex(emit_config_unchecked(cfg)).substr(0, 16);
}

}  // namespace agentkit::config
