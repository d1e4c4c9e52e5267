// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace agentkit::env {

/// Exit code reported when a command is killed at its timeout.
inline constexpr int kTimeoutExitCode = -1001;

inline constexpr std::size_t kDefaultOutputCap = 64 * 1024;

struct ExecResult {
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = 0;
  long long wall_time_ms = 0;
  bool truncated = false;
  /// Bytes the process actually wrote; differs from the text size only when truncated.
  std::size_t stdout_bytes = 0;
  std::size_t stderr_bytes = 0;

  bool timed_out() const { return exit_code == kTimeoutExitCode; }

  /// stdout/stderr with a marker line recording the original size of any truncated stream.
  std::string render() const;
};

struct ProcessOptions {
  std::vector<std::string> argv;
  std::filesystem::path cwd;
  std::chrono::milliseconds timeout{30000};
  std::size_t output_cap = kDefaultOutputCap;
  /// Run the child in fresh user+network namespaces when possible.
  bool isolate_network = false;
  /// Called with the child's process-group id right after spawn, and with -pgid once it is reaped.
  std::function<void(int)> on_group_change;
};

struct ProcessOutcome {
  ExecResult result;
  bool network_isolated = false;
};

/// Spawns argv in its own process group, captures capped output, and kills
/// the whole group at the timeout or once the leader exits.
/// Throws SpawnError if the process cannot be started.
ProcessOutcome run_process(const ProcessOptions& opts);

/// Locates an executable on PATH (or accepts an absolute path).
std::filesystem::path find_executable(const std::string& name);

}  // namespace agentkit::env
