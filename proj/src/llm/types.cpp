// SPDX-License-Identifier: Apache-2.0
#include "agentkit/llm/types.hpp"

#include <fmt/format.h>

#include <set>

#include "agentkit/common/hash.hpp"

namespace agentkit::llm {

const char* to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::tool: return "tool";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  if (s == "tool") return Role::tool;
  throw ProtocolError("unknown message role '" + s + "'");
}

const char* to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop: return "stop";
    case FinishReason::tool_calls: return "tool_calls";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "stop";
}

FinishReason finish_reason_from_string(const std::string& s) {
  if (s == "stop") return FinishReason::stop;
  if (s == "tool_calls" || s == "function_call") return FinishReason::tool_calls;
  if (s == "length") return FinishReason::length;
  if (s == "error") return FinishReason::error;
  return FinishReason::stop;
}

ChatResponse ChatResponse::text(std::string content) {
  ChatResponse r;
  r.content = std::move(content);
  r.finish_reason = FinishReason::stop;
  return r;
}

ChatResponse ChatResponse::calls(std::vector<ToolCallRecord> calls, std::string content) {
  ChatResponse r;
  if (!content.empty()) r.content = std::move(content);
  r.tool_calls = std::move(calls);
  r.finish_reason = FinishReason::tool_calls;
  return r;
}

ChatResponse ChatResponse::call(std::string id, std::string name, Json arguments) {
  return calls({{std::move(id), std::move(name), arguments.dump()}});
}

void validate_request(const ChatRequest& req) {
  std::set<std::string> call_ids;
  for (std::size_t i = 0; i < req.messages.size(); ++i) {
    const auto& m = req.messages[i];
    if (m.role == Role::system && i != 0) {
      throw InvalidRequest(fmt::format("system message at index {}; only index 0 is allowed", i));
    }
    if (m.role == Role::assistant) {
      for (const auto& c : m.tool_calls) call_ids.insert(c.id);
    }
    if (m.role == Role::tool) {
      if (!m.tool_call_id || !call_ids.count(*m.tool_call_id)) {
        throw InvalidRequest(fmt::format("tool message at index {} does not answer a prior tool call", i));
      }
    }
  }
}

Json to_openai_json(const ChatRequest& req) {
  Json messages = Json::array();
  for (const auto& m : req.messages) {
    Json j{{"role", to_string(m.role)}};
    if (m.role == Role::assistant && !m.tool_calls.empty()) {
      j["content"] = m.content.empty() ? Json(nullptr) : Json(m.content);
      Json calls = Json::array();
      for (const auto& c : m.tool_calls) {
        calls.push_back({{"id", c.id}, {"type", "function"}, {"function", {{"name", c.name}, {"arguments", c.arguments}}}});
      }
      j["tool_calls"] = std::move(calls);
    } else {
      j["content"] = m.content;
    }
    if (m.tool_call_id) j["tool_call_id"] = *m.tool_call_id;
    messages.push_back(std::move(j));
  }
  Json body{{"model", req.model},
            {"messages", std::move(messages)},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
  if (!req.tools.empty()) {
    Json tools = Json::array();
    for (const auto& t : req.tools) {
      tools.push_back({{"type", "function"},
                       {"function", {{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}}}});
    }
    body["tools"] = std::move(tools);
  }
  if (req.seed) body["seed"] = *req.seed;
  return body;
}

ChatResponse parse_openai_response(const Json& body) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    throw ProtocolError("response has no choices");
  }
  const auto& choice = body["choices"][0];
  if (!choice.contains("message") || !choice["message"].is_object()) throw ProtocolError("choice has no message");
  const auto& msg = choice["message"];
  ChatResponse r;
  if (msg.contains("content") && msg["content"].is_string()) r.content = msg["content"].get<std::string>();
  if (msg.contains("tool_calls") && msg["tool_calls"].is_array()) {
    std::size_t n = 0;
    for (const auto& c : msg["tool_calls"]) {
      if (!c.contains("function") || !c["function"].is_object()) throw ProtocolError("tool call without function");
      const auto& fn = c["function"];
      ToolCallRecord rec;
      rec.id = c.value("id", fmt::format("call_{}", n));
      rec.name = fn.value("name", "");
      if (fn.contains("arguments")) {
        rec.arguments = fn["arguments"].is_string() ? fn["arguments"].get<std::string>() : fn["arguments"].dump();
      }
      r.tool_calls.push_back(std::move(rec));
      ++n;
    }
  }
  std::string finish = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                           ? choice["finish_reason"].get<std::string>()
                           : "stop";
  r.finish_reason = finish_reason_from_string(finish);
  if (!r.tool_calls.empty()) r.finish_reason = FinishReason::tool_calls;
  if (r.finish_reason == FinishReason::tool_calls && r.tool_calls.empty()) {
    throw ProtocolError("finish_reason=tool_calls without tool calls");
  }
  if (body.contains("usage") && body["usage"].is_object()) {
    const auto& u = body["usage"];
    r.usage.prompt_tokens = u.value("prompt_tokens", 0);
    r.usage.completion_tokens = u.value("completion_tokens", 0);
    r.usage.reported = true;
    if (r.usage.prompt_tokens < 0 || r.usage.completion_tokens < 0) throw ProtocolError("negative usage counters");
  }
  return r;
}

Json to_json(const Message& m) {
  Json j{{"role", to_string(m.role)}, {"content", m.content}};
  if (!m.tool_calls.empty()) {
    Json calls = Json::array();
    for (const auto& c : m.tool_calls) calls.push_back({{"id", c.id}, {"name", c.name}, {"arguments", c.arguments}});
    j["tool_calls"] = std::move(calls);
  }
  if (m.tool_call_id) j["tool_call_id"] = *m.tool_call_id;
  return j;
}

Message message_from_json(const Json& j) {
  Message m;
  m.role = role_from_string(j.at("role").get<std::string>());
  m.content = j.value("content", "");
  if (j.contains("tool_calls")) {
    for (const auto& c : j["tool_calls"]) {
      m.tool_calls.push_back({c.at("id").get<std::string>(), c.at("name").get<std::string>(),
                              c.at("arguments").get<std::string>()});
    }
  }
  if (j.contains("tool_call_id")) m.tool_call_id = j["tool_call_id"].get<std::string>();
  return m;
}

Json to_json(const ChatRequest& req) {
  Json messages = Json::array();
  for (const auto& m : req.messages) messages.push_back(to_json(m));
  Json tools = Json::array();
  for (const auto& t : req.tools) {
    tools.push_back({{"name", t.name}, {"description", t.description}, {"parameters", t.parameters}});
  }
  Json j{{"model", req.model},
         {"messages", std::move(messages)},
         {"tools", std::move(tools)},
         {"temperature", req.temperature},
         {"max_tokens", req.max_tokens}};
  if (req.seed) j["seed"] = *req.seed;
  return j;
}

ChatRequest request_from_json(const Json& j) {
  ChatRequest req;
  req.model = j.at("model").get<std::string>();
  for (const auto& m : j.at("messages")) req.messages.push_back(message_from_json(m));
  for (const auto& t : j.value("tools", Json::array())) {
    req.tools.push_back({t.at("name").get<std::string>(), t.value("description", ""),
                         t.value("parameters", Json::object())});
  }
  req.temperature = j.at("temperature").get<double>();
  req.max_tokens = j.at("max_tokens").get<int>();
  if (j.contains("seed")) req.seed = j["seed"].get<std::int64_t>();
  return req;
}

Json to_json(const ChatResponse& resp) {
  Json calls = Json::array();
  for (const auto& c : resp.tool_calls) calls.push_back({{"id", c.id}, {"name", c.name}, {"arguments", c.arguments}});
  Json j{{"tool_calls", std::move(calls)},
         {"finish_reason", to_string(resp.finish_reason)},
         {"usage",
          {{"prompt_tokens", resp.usage.prompt_tokens},
           {"completion_tokens", resp.usage.completion_tokens},
           {"reported", resp.usage.reported}}}};
  j["content"] = resp.content ? Json(*resp.content) : Json(nullptr);
  return j;
}

ChatResponse response_from_json(const Json& j) {
  ChatResponse r;
  if (j.contains("content") && j["content"].is_string()) r.content = j["content"].get<std::string>();
  for (const auto& c : j.value("tool_calls", Json::array())) {
    r.tool_calls.push_back({c.at("id").get<std::string>(), c.at("name").get<std::string>(),
                            c.at("arguments").get<std::string>()});
  }
  r.finish_reason = finish_reason_from_string(j.value("finish_reason", "stop"));
  if (j.contains("usage")) {
    r.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
    r.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
    r.usage.reported = j["usage"].value("reported", false);
  }
  return r;
}

std::int64_t count_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t count_message_tokens(const Message& m) {
  std::int64_t n = count_tokens(m.content);
  for (const auto& c : m.tool_calls) n += count_tokens(c.name) + count_tokens(c.arguments);
  return n;
}

std::string fingerprint(const ChatRequest& req) {
  Json messages = Json::array();
  for (const auto& m : req.messages) messages.push_back(to_json(m));
  Json tools = Json::array();
  for (const auto& t : req.tools) tools.push_back(t.name);
  Json canonical{{"model", req.model},
                 {"messages", std::move(messages)},
                 {"tools", std::move(tools)},
                 {"temperature", req.temperature},
                 {"max_tokens", req.max_tokens}};
  if (req.seed) canonical["seed"] = *req.seed;
  return sha256_hex(canonical.dump());
}

}  // namespace agentkit::llm
