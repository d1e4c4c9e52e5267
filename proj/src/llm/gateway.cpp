// SPDX-License-Identifier: Apache-2.0
#include "agentkit/llm/gateway.hpp"

namespace agentkit::llm {

Gateway::Gateway(std::shared_ptr<Transport> transport, std::string default_model, std::size_t max_in_flight)
    : transport_(std::move(transport)), default_model_(std::move(default_model)), max_in_flight_(max_in_flight) {
  if (!transport_) throw Error("gateway needs a transport");
  if (max_in_flight_ == 0) max_in_flight_ = 1;
}

ChatResponse Gateway::complete(const ChatRequest& req) {
  validate_request(req);
  ChatRequest effective = req;
  if (effective.model.empty()) effective.model = default_model_;
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
  }
  struct Release {
    Gateway* g;
    ~Release() {
      std::lock_guard lock(g->mu_);
      --g->in_flight_;
      g->cv_.notify_one();
    }
  } release{this};

  ChatResponse resp = transport_->send(effective);
  if (resp.finish_reason == FinishReason::tool_calls && resp.tool_calls.empty()) {
    throw ProtocolError("finish_reason=tool_calls without tool calls");
  }
  if (!resp.tool_calls.empty()) resp.finish_reason = FinishReason::tool_calls;
  if (!resp.usage.reported) {
    std::int64_t prompt = 0;
    for (const auto& m : effective.messages) prompt += count_message_tokens(m);
    std::int64_t completion = count_tokens(resp.content.value_or(""));
    for (const auto& c : resp.tool_calls) completion += count_tokens(c.name) + count_tokens(c.arguments);
    resp.usage.prompt_tokens = static_cast<int>(prompt);
    resp.usage.completion_tokens = static_cast<int>(completion);
  }
  return resp;
}

}  // namespace agentkit::llm
