// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "agentkit/common/error.hpp"
#include "agentkit/common/json.hpp"
#include "agentkit/config/agent_config.hpp"
#include "agentkit/env/process.hpp"

namespace agentkit::env {

enum class Lifecycle { created, ready, closed };

const char* to_string(Lifecycle lc);

class EnvError : public Error {
 public:
  using Error::Error;
};
class UnknownBackend : public EnvError {
 public:
  using EnvError::EnvError;
};
class ResourceError : public EnvError {
 public:
  using EnvError::EnvError;
};
class EnvClosed : public EnvError {
 public:
  using EnvError::EnvError;
};
class SpawnError : public EnvError {
 public:
  using EnvError::EnvError;
};
class InterpreterMissing : public EnvError {
 public:
  using EnvError::EnvError;
};

/// Process-wide settings for environment creation.
struct EnvOptions {
  /// Sessions live under <workdir>/sessions/<session_id>/.
  std::filesystem::path workdir = std::filesystem::temp_directory_path() / "agentkit";
  /// Upper bound for per-call timeouts (the agent's tool_s).
  double max_timeout_s = 30;
};

/// An execution context owned by one episode at a time.
class Environment;
std::unique_ptr<Environment> create_env(const config::EnvSpec& spec, const EnvOptions& options);

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string backend() const = 0;
  const std::string& session_id() const { return session_id_; }
  Lifecycle lifecycle() const;
  const std::vector<std::string>& warnings() const { return warnings_; }
  double max_timeout_s() const { return max_timeout_s_; }

  virtual Json state_snapshot() const;

  ExecResult exec_command(const std::string& command, double timeout_s);
  ExecResult exec_code(const std::string& source, double timeout_s);

  /// Releases scratch space and processes. Idempotent.
  void close();

  /// Session scratch directory (empty for backends without one).
  virtual std::filesystem::path scratch_dir() const { return {}; }

 protected:
  Environment(std::string session_id, double max_timeout_s);

  virtual ExecResult do_exec_command(const std::string& command, double timeout_s) = 0;
  virtual ExecResult do_exec_code(const std::string& source, double timeout_s) = 0;
  virtual void do_close() {}
  void mark_ready();
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  mutable std::mutex mu_;
  int last_exit_code_ = 0;

 private:
  friend std::unique_ptr<Environment> create_env(const config::EnvSpec&, const EnvOptions&);
  void check_call(double timeout_s) const;

  std::string session_id_;
  double max_timeout_s_;
  Lifecycle lifecycle_ = Lifecycle::created;
  std::vector<std::string> warnings_;
};

/// Creates a ready environment. Cloud aliases (e2b, browser) yield a sandbox
/// with a warning recorded on the handle.
std::unique_ptr<Environment> create_env(const config::EnvSpec& spec);

/// Unique across the process lifetime.
std::string new_session_id(const std::string& backend);

}  // namespace agentkit::env
