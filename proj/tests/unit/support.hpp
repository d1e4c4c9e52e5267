// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for the unit and acceptance suites.
#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <unistd.h>
#include <spdlog/spdlog.h>
#include <vector>

#include "agentkit/config/yaml_io.hpp"
#include "agentkit/env/mock_env.hpp"
#include "agentkit/llm/gateway.hpp"
#include "agentkit/runtime/episode.hpp"

namespace testutil {

using namespace agentkit;

static const bool kQuietLogs = (spdlog::set_level(spdlog::level::err), true);

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(AGENTKIT_TEST_DATA) / rel; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh empty directory, unique per call.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto p = std::filesystem::temp_directory_path() /
           ("agentkit-test-" + std::to_string(::getpid()) + "-" + tag + "-" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline config::AgentConfig make_config(const std::string& name = "tester",
                                       const std::vector<std::string>& toolkits = {}) {
  config::AgentConfig c;
  c.name = name;
  c.instructions = "You are a careful assistant.";
  for (const auto& t : toolkits) c.toolkits.push_back({t, {}});
  return c;
}

struct ScriptedRig {
  std::shared_ptr<llm::ScriptedTransport> transport = std::make_shared<llm::ScriptedTransport>();
  std::shared_ptr<llm::Gateway> gateway = std::make_shared<llm::Gateway>(transport);
};

inline llm::ChatResponse text(const std::string& s) { return llm::ChatResponse::text(s); }

inline llm::ChatResponse call(const std::string& id, const std::string& tool, const Json& args) {
  return llm::ChatResponse::call(id, tool, args);
}

inline runtime::EnvFactory mock_env_factory(std::vector<env::MockRule> rules = {}) {
  return [rules](const config::EnvSpec&, const env::EnvOptions& o) {
    return std::make_shared<env::MockEnvironment>(rules, o.max_timeout_s);
  };
}

inline runtime::RuntimeDeps deps_for(const std::shared_ptr<llm::Gateway>& gw) {
  runtime::RuntimeDeps d;
  d.gateway = gw;
  return d;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace testutil
