// SPDX-License-Identifier: Apache-2.0
#include "agentkit/env/environment.hpp"

#include <fmt/format.h>
#include <signal.h>
#include <spdlog/spdlog.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <random>
#include <set>

#include "agentkit/common/deadline.hpp"
#include "agentkit/env/mock_env.hpp"

namespace agentkit::env {

const char* to_string(Lifecycle lc) {
  switch (lc) {
    case Lifecycle::created: return "created";
    case Lifecycle::ready: return "ready";
    case Lifecycle::closed: return "closed";
  }
  return "unknown";
}

std::string new_session_id(const std::string& backend) {
  static std::atomic<unsigned long long> counter{0};
  static const unsigned long long salt = std::random_device{}();
  return fmt::format("{}-{}-{:x}-{}", backend, ::getpid(), salt & 0xffffff, ++counter);
}

Environment::Environment(std::string session_id, double max_timeout_s)
    : session_id_(std::move(session_id)), max_timeout_s_(max_timeout_s) {}

Lifecycle Environment::lifecycle() const {
  std::lock_guard lock(mu_);
  return lifecycle_;
}

void Environment::mark_ready() {
  std::lock_guard lock(mu_);
  lifecycle_ = Lifecycle::ready;
}

Json Environment::state_snapshot() const {
  std::lock_guard lock(mu_);
  return Json{{"backend", backend()},
              {"session_id", session_id_},
              {"lifecycle", to_string(lifecycle_)},
              {"last_exit_code", last_exit_code_}};
}

void Environment::check_call(double timeout_s) const {
  {
    std::lock_guard lock(mu_);
    if (lifecycle_ != Lifecycle::ready) throw EnvClosed("environment " + session_id_ + " is not ready");
  }
  if (!(timeout_s > 0) || timeout_s > max_timeout_s_ + 1e-9) {
    throw std::invalid_argument(
        fmt::format("timeout {}s outside (0, {}s] for environment {}", timeout_s, max_timeout_s_, session_id_));
  }
}

ExecResult Environment::exec_command(const std::string& command, double timeout_s) {
  check_call(timeout_s);
  auto r = do_exec_command(command, timeout_s);
  std::lock_guard lock(mu_);
  last_exit_code_ = r.exit_code;
  return r;
}

ExecResult Environment::exec_code(const std::string& source, double timeout_s) {
  check_call(timeout_s);
  if (source.empty()) throw std::invalid_argument("exec_code needs nonempty source");
  auto r = do_exec_code(source, timeout_s);
  std::lock_guard lock(mu_);
  last_exit_code_ = r.exit_code;
  return r;
}

void Environment::close() {
  {
    std::lock_guard lock(mu_);
    if (lifecycle_ == Lifecycle::closed) return;
    lifecycle_ = Lifecycle::closed;
  }
  do_close();
}

namespace {

/// Subprocess-backed environment: `sandbox` (scratch-dir jail, interpreter,
/// optional network isolation) and `local_shell` (plain shell in a cwd).
class ProcessEnvironment : public Environment {
 public:
  ProcessEnvironment(std::string backend, const Json& cfg, const EnvOptions& options)
      : Environment(new_session_id(backend), options.max_timeout_s), backend_(std::move(backend)) {
    scratch_ = options.workdir / "sessions" / session_id();
    std::error_code ec;
    std::filesystem::create_directories(scratch_, ec);
    if (ec) throw ResourceError("cannot create scratch dir " + scratch_.string() + ": " + ec.message());
    cwd_ = scratch_;
    if (backend_ == "local_shell" && cfg.contains("cwd")) cwd_ = cfg["cwd"].get<std::string>();
    if (backend_ == "sandbox") {
      interpreter_ = cfg.value("interpreter", std::string("python3"));
      isolate_network_ = !cfg.value("network", false);
    }
    output_cap_ = cfg.value("output_cap", kDefaultOutputCap);
    mark_ready();
  }

  ~ProcessEnvironment() override { close(); }

  std::string backend() const override { return backend_; }
  std::filesystem::path scratch_dir() const override { return scratch_; }

  Json state_snapshot() const override {
    auto j = Environment::state_snapshot();
    std::lock_guard lock(mu_);
    j["cwd"] = cwd_.string();
    if (backend_ == "sandbox") {
      j["interpreter"] = interpreter_;
      j["network_isolated"] = network_isolated_;
    }
    return j;
  }

 protected:
  ExecResult do_exec_command(const std::string& command, double timeout_s) override {
    return run({"/bin/sh", "-c", command}, timeout_s);
  }

  ExecResult do_exec_code(const std::string& source, double timeout_s) override {
    if (backend_ != "sandbox") throw EnvError("exec_code needs a sandbox or mock environment");
    auto interp = find_executable(interpreter_);
    if (interp.empty()) throw InterpreterMissing("sandbox interpreter not found: " + interpreter_);
    std::filesystem::path file;
    {
      std::lock_guard lock(mu_);
      const bool python = interpreter_.find("python") != std::string::npos;
      file = scratch_ / fmt::format("snippet_{}{}", ++snippets_, python ? ".py" : ".src");
    }
    {
      std::ofstream f(file, std::ios::binary);
      if (!f) throw ResourceError("cannot write " + file.string());
      f << source;
    }
    return run({interp.string(), file.string()}, timeout_s);
  }

  void do_close() override {
    std::set<int> groups;
    {
      std::lock_guard lock(mu_);
      groups = live_groups_;
    }
    for (int g : groups) ::kill(-g, SIGKILL);
    std::error_code ec;
    std::filesystem::remove_all(scratch_, ec);
    if (ec) spdlog::warn("could not remove {}: {}", scratch_.string(), ec.message());
  }

 private:
  ExecResult run(std::vector<std::string> argv, double timeout_s) {
    ProcessOptions opts;
    opts.argv = std::move(argv);
    opts.cwd = cwd_;
    opts.timeout = agentkit::to_millis(timeout_s);
    opts.output_cap = output_cap_;
    opts.isolate_network = isolate_network_;
    opts.on_group_change = [this](int g) {
      std::lock_guard lock(mu_);
      if (g > 0) live_groups_.insert(g);
      else live_groups_.erase(-g);
    };
    auto outcome = run_process(opts);
    std::lock_guard lock(mu_);
    network_isolated_ = outcome.network_isolated;
    return outcome.result;
  }

  std::string backend_;
  std::filesystem::path scratch_;
  std::filesystem::path cwd_;
  std::string interpreter_;
  bool isolate_network_ = false;
  bool network_isolated_ = false;
  std::size_t output_cap_ = kDefaultOutputCap;
  std::size_t snippets_ = 0;
  std::set<int> live_groups_;
};

}  // namespace

std::unique_ptr<Environment> create_env(const config::EnvSpec& spec, const EnvOptions& options) {
  std::string name = spec.name;
  std::string alias_warning;
  if (auto it = config::env_aliases().find(name); it != config::env_aliases().end()) {
    alias_warning = fmt::format("env '{}' is a cloud backend; using local '{}' instead", name, it->second);
    spdlog::warn(alias_warning);
    name = it->second;
  }
  std::unique_ptr<Environment> env;
  if (name == "mock") {
    std::vector<MockRule> rules;
    if (spec.config.contains("script")) {
      rules = parse_mock_script(spec.config["script"]);
    } else if (spec.config.contains("script_file")) {
      std::ifstream in(spec.config["script_file"].get<std::string>());
      if (!in) throw ResourceError("cannot read mock script " + spec.config["script_file"].get<std::string>());
      rules = parse_mock_script(Json::parse(in));
    }
    env = std::make_unique<MockEnvironment>(std::move(rules), options.max_timeout_s);
  } else if (name == "sandbox" || name == "local_shell") {
    env = std::make_unique<ProcessEnvironment>(name, spec.config, options);
  } else {
    throw UnknownBackend("unknown env backend '" + spec.name + "'");
  }
  if (!alias_warning.empty()) env->add_warning(alias_warning);
  return env;
}

std::unique_ptr<Environment> create_env(const config::EnvSpec& spec) { return create_env(spec, EnvOptions{}); }

}  // namespace agentkit::env
