// SPDX-License-Identifier: Apache-2.0
#include "agentkit/env/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "agentkit/common/deadline.hpp"
#include "agentkit/env/environment.hpp"

namespace agentkit::env {

std::string ExecResult::render() const {
  std::string out = stdout_text;
  if (stdout_bytes > stdout_text.size()) {
    if (!out.empty() && out.back() != '\n') out.push_back('\n');
    out += "[output truncated: " + std::to_string(stdout_bytes) + " bytes total]\n";
  }
  if (!stderr_text.empty()) {
    if (!out.empty() && out.back() != '\n') out.push_back('\n');
    out += "[stderr]\n" + stderr_text;
    if (stderr_bytes > stderr_text.size()) {
      if (out.back() != '\n') out.push_back('\n');
      out += "[stderr truncated: " + std::to_string(stderr_bytes) + " bytes total]\n";
    }
  }
  return out;
}

std::filesystem::path find_executable(const std::string& name) {
  auto executable = [](const std::filesystem::path& p) {
    struct stat st {};
    return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string::npos) return executable(name) ? std::filesystem::path(name) : std::filesystem::path{};
  const char* path_env = std::getenv("PATH");
  std::stringstream dirs(path_env ? path_env : "/usr/local/bin:/usr/bin:/bin");
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    auto candidate = std::filesystem::path(dir) / name;
    if (executable(candidate)) return candidate;
  }
  return {};
}

namespace {

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) throw SpawnError(std::string("pipe2 failed: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fd[0] >= 0) ::close(fd[0]), fd[0] = -1;
  }
  void close_write() {
    if (fd[1] >= 0) ::close(fd[1]), fd[1] = -1;
  }
};

struct Capture {
  std::string text;
  std::size_t total = 0;
  bool open = true;
};

void read_available(int fd, Capture& cap, std::size_t limit) {
  std::array<char, 16384> buf{};
  ssize_t n = ::read(fd, buf.data(), buf.size());
  if (n <= 0) {
    if (n == 0 || (errno != EINTR && errno != EAGAIN)) cap.open = false;
    return;
  }
  cap.total += static_cast<std::size_t>(n);
  if (cap.text.size() < limit) {
    cap.text.append(buf.data(), std::min<std::size_t>(static_cast<std::size_t>(n), limit - cap.text.size()));
  }
}

}  // namespace

ProcessOutcome run_process(const ProcessOptions& opts) {
  if (opts.argv.empty()) throw SpawnError("empty argv");
  auto exe = find_executable(opts.argv[0]);
  if (exe.empty()) throw SpawnError("executable not found: " + opts.argv[0]);

  std::vector<std::string> args = opts.argv;
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::string exe_path = exe.string();
  std::string cwd = opts.cwd.string();

  Pipe out, err, status;
  const auto start = SteadyClock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw SpawnError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    int isolated = 0;
    if (opts.isolate_network && ::unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0) isolated = 1;
    (void)!::write(status.fd[1], &isolated, sizeof isolated);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::dup2(out.fd[1], STDOUT_FILENO);
    ::dup2(err.fd[1], STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      int e = errno;
      (void)!::write(status.fd[1], &e, sizeof e);
      ::_exit(127);
    }
    ::execv(exe_path.c_str(), argv.data());
    int e = errno;
    (void)!::write(status.fd[1], &e, sizeof e);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  if (opts.on_group_change) opts.on_group_change(pid);
  out.close_write();
  err.close_write();
  status.close_write();

  ProcessOutcome outcome;
  int isolated = 0;
  int exec_errno = 0;
  if (::read(status.fd[0], &isolated, sizeof isolated) == sizeof isolated) outcome.network_isolated = isolated != 0;
  if (::read(status.fd[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    if (opts.on_group_change) opts.on_group_change(-pid);
    throw SpawnError("cannot start " + opts.argv[0] + ": " + std::strerror(exec_errno));
  }

  const auto deadline = start + opts.timeout;
  Capture out_cap, err_cap;
  bool timed_out = false;
  bool leader_reaped = false;
  int wait_status = 0;

  while (out_cap.open || err_cap.open || !leader_reaped) {
    if (!leader_reaped) {
      pid_t r = ::waitpid(pid, &wait_status, WNOHANG);
      if (r == pid) {
        leader_reaped = true;
        // stragglers left in the group would otherwise hold the pipes open
        ::kill(-pid, SIGKILL);
      }
    }
    if (!timed_out && SteadyClock::now() >= deadline) {
      timed_out = true;
      ::kill(-pid, SIGKILL);
    }
    if (!out_cap.open && !err_cap.open && leader_reaped) break;
    std::array<pollfd, 2> fds{};
    nfds_t n = 0;
    if (out_cap.open) fds[n++] = {out.fd[0], POLLIN, 0};
    if (err_cap.open) fds[n++] = {err.fd[0], POLLIN, 0};
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - SteadyClock::now()).count();
    int wait_ms = timed_out ? 50 : static_cast<int>(std::clamp<long long>(remaining, 0, 20));
    int ready = ::poll(fds.data(), n, wait_ms);
    if (ready < 0 && errno != EINTR) break;
    for (nfds_t i = 0; i < n; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      if (fds[i].fd == out.fd[0]) read_available(out.fd[0], out_cap, opts.output_cap);
      else read_available(err.fd[0], err_cap, opts.output_cap);
    }
  }
  if (opts.on_group_change) opts.on_group_change(-pid);

  auto& r = outcome.result;
  r.wall_time_ms = elapsed_ms(start);
  r.stdout_text = std::move(out_cap.text);
  r.stderr_text = std::move(err_cap.text);
  r.stdout_bytes = out_cap.total;
  r.stderr_bytes = err_cap.total;
  r.truncated = r.stdout_bytes > r.stdout_text.size() || r.stderr_bytes > r.stderr_text.size();
  if (timed_out) {
    r.exit_code = kTimeoutExitCode;
  } else if (WIFEXITED(wait_status)) {
    r.exit_code = WEXITSTATUS(wait_status);
  } else if (WIFSIGNALED(wait_status)) {
    r.exit_code = 128 + WTERMSIG(wait_status);
  }
  return outcome;
}

}  // namespace agentkit::env
