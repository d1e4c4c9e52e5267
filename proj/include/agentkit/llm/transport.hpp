// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string_view>
#include <variant>

#include "agentkit/llm/types.hpp"

namespace agentkit::llm {

enum class TransportKind { http, scripted, replay, record };

const char* to_string(TransportKind kind);

class Transport {
 public:
  virtual ~Transport() = default;
  virtual ChatResponse send(const ChatRequest& req) = 0;
  virtual TransportKind kind() const = 0;
};

/// One scripted step: a response (or an exception to throw) after an optional delay.
struct ScriptedStep {
  std::variant<ChatResponse, std::exception_ptr> outcome;
  std::chrono::milliseconds delay{0};

  ScriptedStep(ChatResponse r, std::chrono::milliseconds d = {}) : outcome(std::move(r)), delay(d) {}
  ScriptedStep(std::exception_ptr e, std::chrono::milliseconds d = {}) : outcome(e), delay(d) {}
};

/// FIFO queue of canned responses. Records every request it serves.
class ScriptedTransport : public Transport {
 public:
  ScriptedTransport() = default;
  explicit ScriptedTransport(std::vector<ChatResponse> responses);

  void push(ScriptedStep step);
  void push(ChatResponse response) { push(ScriptedStep(std::move(response))); }

  ChatResponse send(const ChatRequest& req) override;
  TransportKind kind() const override { return TransportKind::scripted; }

  std::size_t remaining() const;
  std::vector<ChatRequest> requests() const;

  /// Throws ScriptExhausted-style error if responses were left unconsumed.
  void expect_exhausted() const;

 private:
  mutable std::mutex mu_;
  std::deque<ScriptedStep> steps_;
  std::vector<ChatRequest> seen_;
};

/// Computes each response from the request; lets concurrent episodes be
/// scripted deterministically (routing on task text, seed, turn index).
class FunctionTransport : public Transport {
 public:
  using Responder = std::function<ChatResponse(const ChatRequest&)>;

  explicit FunctionTransport(Responder fn, std::chrono::milliseconds latency = {});

  ChatResponse send(const ChatRequest& req) override;
  TransportKind kind() const override { return TransportKind::scripted; }

  std::size_t calls() const;
  std::vector<ChatRequest> requests() const;

 private:
  Responder fn_;
  std::chrono::milliseconds latency_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> seen_;
};

/// One cassette line: {"fingerprint","request","response","timestamp"}.
struct CassetteRecord {
  std::string fingerprint;
  ChatRequest request;
  ChatResponse response;
  std::string timestamp;
};

std::vector<CassetteRecord> load_cassette(const std::filesystem::path& path);

/// Serves responses from a JSON Lines cassette keyed by request fingerprint.
/// Repeated fingerprints are served in recorded order.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(const std::filesystem::path& cassette);
  explicit ReplayTransport(std::vector<CassetteRecord> records);

  ChatResponse send(const ChatRequest& req) override;
  TransportKind kind() const override { return TransportKind::replay; }

 private:
  std::mutex mu_;
  std::map<std::string, std::deque<ChatResponse>> by_fingerprint_;
};

/// Forwards to an inner transport and appends each exchange to a cassette.
class RecordTransport : public Transport {
 public:
  RecordTransport(std::shared_ptr<Transport> inner, const std::filesystem::path& cassette);

  ChatResponse send(const ChatRequest& req) override;
  TransportKind kind() const override { return TransportKind::record; }

 private:
  std::shared_ptr<Transport> inner_;
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace agentkit::llm
