// SPDX-License-Identifier: Apache-2.0
#include "agentkit/llm/transport.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <thread>

namespace agentkit::llm {

const char* to_string(TransportKind kind) {
  switch (kind) {
    case TransportKind::http: return "http";
    case TransportKind::scripted: return "scripted";
    case TransportKind::replay: return "replay";
    case TransportKind::record: return "record";
  }
  return "unknown";
}

ScriptedTransport::ScriptedTransport(std::vector<ChatResponse> responses) {
  for (auto& r : responses) steps_.emplace_back(std::move(r));
}

void ScriptedTransport::push(ScriptedStep step) {
  std::lock_guard lock(mu_);
  steps_.push_back(std::move(step));
}

ChatResponse ScriptedTransport::send(const ChatRequest& req) {
  std::optional<ScriptedStep> step;
  {
    std::lock_guard lock(mu_);
    seen_.push_back(req);
    if (steps_.empty()) {
      throw ScriptExhausted(fmt::format("scripted transport exhausted after {} requests", seen_.size() - 1));
    }
    step.emplace(std::move(steps_.front()));
    steps_.pop_front();
  }
  if (step->delay.count() > 0) std::this_thread::sleep_for(step->delay);
  if (auto* err = std::get_if<std::exception_ptr>(&step->outcome)) std::rethrow_exception(*err);
  return std::get<ChatResponse>(step->outcome);
}

std::size_t ScriptedTransport::remaining() const {
  std::lock_guard lock(mu_);
  return steps_.size();
}

std::vector<ChatRequest> ScriptedTransport::requests() const {
  std::lock_guard lock(mu_);
  return seen_;
}

void ScriptedTransport::expect_exhausted() const {
  std::lock_guard lock(mu_);
  if (!steps_.empty()) {
    throw ScriptExhausted(fmt::format("{} scripted responses left unconsumed", steps_.size()));
  }
}

FunctionTransport::FunctionTransport(Responder fn, std::chrono::milliseconds latency)
    : fn_(std::move(fn)), latency_(latency) {}

ChatResponse FunctionTransport::send(const ChatRequest& req) {
  {
    std::lock_guard lock(mu_);
    seen_.push_back(req);
  }
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
  return fn_(req);
}

std::size_t FunctionTransport::calls() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

std::vector<ChatRequest> FunctionTransport::requests() const {
  std::lock_guard lock(mu_);
  return seen_;
}

std::vector<CassetteRecord> load_cassette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open cassette " + path.string());
  std::vector<CassetteRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = Json::parse(line);
      records.push_back({j.at("fingerprint").get<std::string>(), request_from_json(j.at("request")),
                         response_from_json(j.at("response")), j.value("timestamp", "")});
    } catch (const Json::exception& e) {
      throw ProtocolError(fmt::format("{}:{}: bad cassette record: {}", path.string(), line_no, e.what()));
    }
  }
  return records;
}

ReplayTransport::ReplayTransport(const std::filesystem::path& cassette) : ReplayTransport(load_cassette(cassette)) {}

ReplayTransport::ReplayTransport(std::vector<CassetteRecord> records) {
  for (auto& r : records) by_fingerprint_[r.fingerprint].push_back(std::move(r.response));
}

ChatResponse ReplayTransport::send(const ChatRequest& req) {
  auto fp = fingerprint(req);
  std::lock_guard lock(mu_);
  auto it = by_fingerprint_.find(fp);
  if (it == by_fingerprint_.end() || it->second.empty()) {
    throw TransportError("cassette has no response for request fingerprint " + fp);
  }
  auto resp = std::move(it->second.front());
  it->second.pop_front();
  return resp;
}

RecordTransport::RecordTransport(std::shared_ptr<Transport> inner, const std::filesystem::path& cassette)
    : inner_(std::move(inner)), out_(cassette, std::ios::app) {
  if (!out_) throw TransportError("cannot open cassette for writing: " + cassette.string());
}

ChatResponse RecordTransport::send(const ChatRequest& req) {
  auto resp = inner_->send(req);
  Json record{{"fingerprint", fingerprint(req)},
              {"request", to_json(req)},
              {"response", to_json(resp)},
              {"timestamp", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)))}};
  std::lock_guard lock(mu_);
  out_ << record.dump() << '\n';
  out_.flush();
  return resp;
}

}  // namespace agentkit::llm
