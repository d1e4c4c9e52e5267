// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agentkit/common/error.hpp"
#include "agentkit/common/json.hpp"

namespace agentkit::llm {

enum class Role { system, user, assistant, tool };

const char* to_string(Role role);
Role role_from_string(const std::string& s);

/// One function call emitted by the model. `arguments` is the raw text the
/// model produced; it is parsed (and may fail to parse) at invocation time.
struct ToolCallRecord {
  std::string id;
  std::string name;
  std::string arguments;

  bool operator==(const ToolCallRecord&) const = default;
};

struct Message {
  Role role = Role::user;
  std::string content;
  std::vector<ToolCallRecord> tool_calls;
  std::optional<std::string> tool_call_id;

  bool operator==(const Message&) const = default;

  static Message system(std::string text) { return {Role::system, std::move(text), {}, std::nullopt}; }
  static Message user(std::string text) { return {Role::user, std::move(text), {}, std::nullopt}; }
  static Message assistant(std::string text, std::vector<ToolCallRecord> calls = {}) {
    return {Role::assistant, std::move(text), std::move(calls), std::nullopt};
  }
  static Message tool(std::string call_id, std::string text) {
    return {Role::tool, std::move(text), {}, std::move(call_id)};
  }
};

struct ToolDeclaration {
  std::string name;
  std::string description;
  Json parameters = Json::object();

  bool operator==(const ToolDeclaration&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  std::vector<ToolDeclaration> tools;
  double temperature = 0.7;
  int max_tokens = 4096;
  /// Sampling seed; rollouts of one group use distinct seeds.
  std::optional<std::int64_t> seed;

  bool operator==(const ChatRequest&) const = default;
};

enum class FinishReason { stop, tool_calls, length, error };

const char* to_string(FinishReason reason);
FinishReason finish_reason_from_string(const std::string& s);

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
  /// False when the counts are byte-length estimates rather than server-reported.
  bool reported = false;

  bool operator==(const Usage&) const = default;
};

struct ChatResponse {
  std::optional<std::string> content;
  std::vector<ToolCallRecord> tool_calls;
  Usage usage;
  FinishReason finish_reason = FinishReason::stop;

  bool operator==(const ChatResponse&) const = default;

  static ChatResponse text(std::string content);
  static ChatResponse calls(std::vector<ToolCallRecord> calls, std::string content = {});
  static ChatResponse call(std::string id, std::string name, Json arguments);
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ScriptExhausted : public Error {
 public:
  using Error::Error;
};

/// Precondition violations on ChatRequest (misplaced system message, dangling tool reply).
class InvalidRequest : public Error {
 public:
  using Error::Error;
};

void validate_request(const ChatRequest& req);

// OpenAI-compatible chat-completions wire format.
Json to_openai_json(const ChatRequest& req);
ChatResponse parse_openai_response(const Json& body);

// Lossless agentkit JSON forms (used by cassettes).
Json to_json(const Message& m);
Message message_from_json(const Json& j);
Json to_json(const ChatRequest& req);
ChatRequest request_from_json(const Json& j);
Json to_json(const ChatResponse& resp);
ChatResponse response_from_json(const Json& j);

/// ceil(bytes / 4): a budget signal, not a tokenizer.
std::int64_t count_tokens(std::string_view text);

/// Estimated tokens of one rendered message (content plus tool-call names and arguments).
std::int64_t count_message_tokens(const Message& m);

/// SHA-256 over the canonical JSON of every output-affecting request field:
/// {"max_tokens","messages","model","seed"?,"temperature","tools":[names]}.
std::string fingerprint(const ChatRequest& req);

}  // namespace agentkit::llm
