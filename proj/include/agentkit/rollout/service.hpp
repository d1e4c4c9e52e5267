// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "agentkit/autogen/meta_agent.hpp"
#include "agentkit/rollout/collector.hpp"

namespace httplib {
class Server;
}

namespace agentkit::rollout {

class BindError : public Error {
 public:
  using Error::Error;
};

class SessionNotFound : public Error {
 public:
  using Error::Error;
};

class NotAwaitingUser : public Error {
 public:
  using Error::Error;
};

class SessionClosed : public Error {
 public:
  using Error::Error;
};

enum class SessionState { running, awaiting_user, done, failed };

const char* to_string(SessionState s);

/// A meta-agent dialogue driven over HTTP. Events get ids 1, 2, ... in emission order.
class ServiceSession : public autogen::DialogueSession {
 public:
  ServiceSession(std::string id, std::string request);

  std::string request() const override { return request_; }
  std::string ask(const std::string& question) override;
  void emit(const Json& event) override;

  /// Resumes a pending ask_user. Throws NotAwaitingUser otherwise.
  void answer(const std::string& text);
  void finish(SessionState final_state, const std::string& yaml_or_error);
  void close();

  const std::string& id() const { return id_; }
  SessionState state() const;
  Json view() const;

  /// Blocks until an event with id > after exists, the session ends, or the timeout passes.
  std::vector<Json> events_after(std::size_t after, std::chrono::milliseconds timeout, bool* finished) const;

 private:
  std::string id_;
  std::string request_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<Json> events_;
  SessionState state_ = SessionState::running;
  std::optional<std::string> pending_question_;
  std::optional<std::string> answer_;
  std::string config_yaml_;
  std::string error_;
  bool closed_ = false;
};

struct ServiceOptions {
  CollectorOptions collector;
  /// Bank snapshots served from <banks_root>/<run_id>/epoch_<n>.json.
  std::filesystem::path banks_root = "banks";
  /// Base directory for config_ref lookups.
  std::filesystem::path config_root = ".";
  /// Tool library and sandbox for meta-agent sessions; sessions are refused when unset.
  std::shared_ptr<autogen::ToolLibrary> library;
  std::function<std::shared_ptr<env::Environment>()> sandbox_factory;
  autogen::MetaAgentOptions meta;
};

/// REST front end over a RolloutCollector plus meta-agent sessions.
class RolloutService {
 public:
  RolloutService(runtime::RuntimeDeps deps, ServiceOptions options);
  ~RolloutService();

  RolloutService(const RolloutService&) = delete;
  RolloutService& operator=(const RolloutService&) = delete;

  /// Binds and serves in the background. Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread until stop() is called from elsewhere.
  void serve_forever(const std::string& host, int port);
  /// Drains running episodes, fails unfinished jobs, ends sessions and stops listening.
  void stop();

  RolloutCollector& collector() { return *collector_; }
  std::shared_ptr<ServiceSession> session(const std::string& id) const;
  std::string create_session(const std::string& request);

 private:
  void install_routes();
  int bind(const std::string& host, int port);

  runtime::RuntimeDeps deps_;
  ServiceOptions options_;
  std::unique_ptr<RolloutCollector> collector_;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<ServiceSession>> sessions_;
  std::vector<std::thread> session_threads_;
  std::stop_source stop_source_;
  std::size_t next_session_ = 1;
  std::atomic<bool> stopping_{false};
  bool stopped_ = false;
};

}  // namespace agentkit::rollout
