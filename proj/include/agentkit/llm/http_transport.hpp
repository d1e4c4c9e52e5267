// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <string>

#include "agentkit/llm/transport.hpp"

namespace agentkit::llm {

struct RetryPolicy {
  int max_retries = 3;
  /// Backoff before retry n (0-based) is base * 2^n, scaled by a uniform [0, 1) jitter.
  std::chrono::milliseconds base{500};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to std::this_thread::sleep_for
};

struct HttpEndpoint {
  /// e.g. "https://api.openai.com/v1"; requests go to <base_url>/chat/completions.
  std::string base_url;
  std::string api_key;
  std::chrono::seconds connect_timeout{10};
  std::chrono::seconds read_timeout{600};

  /// Reads LLM_BASE_URL and LLM_API_KEY. Throws TransportError if the URL is unset.
  static HttpEndpoint from_env();
};

/// OpenAI-compatible chat completions over HTTP(S) with retry on 429/5xx and
/// connection failures.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(HttpEndpoint endpoint, RetryPolicy retry = {});

  ChatResponse send(const ChatRequest& req) override;
  TransportKind kind() const override { return TransportKind::http; }

  int attempts_last_call() const { return last_attempts_; }

 private:
  std::chrono::milliseconds backoff(int retry);

  HttpEndpoint endpoint_;
  RetryPolicy retry_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_{std::random_device{}()};
  int last_attempts_ = 0;
};

}  // namespace agentkit::llm
