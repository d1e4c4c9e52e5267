// SPDX-License-Identifier: Apache-2.0
#include "agentkit/llm/http_transport.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <regex>
#include <thread>

namespace agentkit::llm {

HttpEndpoint HttpEndpoint::from_env() {
  HttpEndpoint ep;
  const char* url = std::getenv("LLM_BASE_URL");
  if (!url || !*url) throw TransportError("LLM_BASE_URL is not set");
  ep.base_url = url;
  if (const char* key = std::getenv("LLM_API_KEY")) ep.api_key = key;
  return ep;
}

HttpTransport::HttpTransport(HttpEndpoint endpoint, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(std::move(retry)) {
  if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds HttpTransport::backoff(int retry) {
  auto cap = retry_.base * (1LL << retry);
  std::lock_guard lock(rng_mu_);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  return std::chrono::milliseconds(static_cast<long long>(static_cast<double>(cap.count()) * jitter(rng_)));
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw TransportError("malformed LLM base URL '" + url + "'");
  std::string path = m[2].matched ? m[2].str() : "";
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {m[1].str(), path};
}

bool transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace

ChatResponse HttpTransport::send(const ChatRequest& req) {
  auto url = split_url(endpoint_.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(endpoint_.connect_timeout);
  client.set_read_timeout(endpoint_.read_timeout);
  if (!endpoint_.api_key.empty()) client.set_bearer_token_auth(endpoint_.api_key);
  const std::string body = to_openai_json(req).dump();
  const std::string path = url.path + "/chat/completions";

  std::string last_error;
  for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
    last_attempts_ = attempt + 1;
    if (attempt > 0) retry_.sleep(backoff(attempt - 1));
    auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      spdlog::warn("llm request attempt {} failed: {}", attempt + 1, last_error);
      continue;
    }
    if (transient_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      spdlog::warn("llm request attempt {} got {}", attempt + 1, last_error);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
    }
    Json parsed;
    try {
      parsed = Json::parse(res->body);
    } catch (const Json::parse_error& e) {
      throw ProtocolError(std::string("unparsable response body: ") + e.what());
    }
    return parse_openai_response(parsed);
  }
  throw TransportError("retries exhausted: " + last_error);
}

}  // namespace agentkit::llm
