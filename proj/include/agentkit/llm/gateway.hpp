// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>

#include "agentkit/llm/transport.hpp"

namespace agentkit::llm {

/// Single egress point for model traffic. Validates requests, caps in-flight
/// calls, and fills usage estimates when the transport reports none.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Transport> transport, std::string default_model = "default",
                   std::size_t max_in_flight = 64);

  ChatResponse complete(const ChatRequest& req);

  TransportKind transport_kind() const { return transport_->kind(); }
  const std::string& default_model() const { return default_model_; }
  const std::shared_ptr<Transport>& transport() const { return transport_; }

 private:
  std::shared_ptr<Transport> transport_;
  std::string default_model_;
  std::size_t max_in_flight_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
};

}  // namespace agentkit::llm
