// SPDX-License-Identifier: Apache-2.0
#include "agentkit/tools/mcp.hpp"

#include <fcntl.h>
#include <fmt/format.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "agentkit/env/process.hpp"

namespace agentkit::tools {
namespace {

constexpr const char* kProtocolVersion = "2024-11-05";

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw RemoteError(std::string("write to remote server failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::vector<ToolDef> tool_defs(const std::shared_ptr<McpClient>& client, const std::string& label) {
  std::vector<ToolDef> out;
  for (const auto& t : client->tools()) {
    ToolDef d;
    d.name = t.value("name", "");
    d.description = t.value("description", "");
    d.parameters = t.value("inputSchema", Json{{"type", "object"}, {"properties", Json::object()}});
    if (!d.parameters.contains("type")) d.parameters["type"] = "object";
    d.source = ToolSource::remote_protocol;
    d.binding = label + "#" + d.name;
    const auto name = d.name;
    d.handler = [client, name](const Json& args, const ToolContext& ctx) {
      auto result = client->call_tool(name, args, std::max(0.001, ctx.remaining_s()));
      std::string text;
      for (const auto& c : result.value("content", Json::array())) {
        if (c.value("type", "") != "text") continue;
        if (!text.empty()) text += "\n";
        text += c.value("text", "");
      }
      if (result.value("isError", false)) return ToolOutput::error(text);
      return ToolOutput::ok(text);
    };
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

std::shared_ptr<McpClient> McpClient::connect(const RemoteSpec& spec) {
  if (spec.command.empty()) throw HandshakeError("remote server command is empty");
  auto exe = env::find_executable(spec.command[0]);
  if (exe.empty()) throw HandshakeError("remote server not found: " + spec.command[0]);
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw HandshakeError("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw HandshakeError("pipe failed");
  }
  std::vector<std::string> argv = spec.command;
  argv[0] = exe.string();
  std::vector<char*> cargv;
  for (auto& a : argv) cargv.push_back(a.data());
  cargv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) throw HandshakeError("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], 0);
    ::dup2(out_pipe[1], 1);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, 2);
    ::execv(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);

  std::shared_ptr<McpClient> c(new McpClient());
  c->pid_ = pid;
  c->to_child_ = in_pipe[1];
  c->from_child_ = out_pipe[0];

  const auto deadline = SteadyClock::now() + to_millis(spec.handshake_timeout_s);
  std::lock_guard lock(c->mu_);
  try {
    auto init = c->request("initialize",
                           Json{{"protocolVersion", kProtocolVersion},
                                {"capabilities", Json::object()},
                                {"clientInfo", {{"name", "agentkit"}, {"version", "0.1.0"}}}},
                           deadline);
    c->server_info_ = init.value("serverInfo", Json::object());
    c->send(Json{{"jsonrpc", "2.0"}, {"method", "notifications/initialized"}});
    auto listed = c->request("tools/list", Json::object(), deadline);
    c->tools_ = listed.value("tools", Json::array());
  } catch (const RemoteError& e) {
    throw HandshakeError(fmt::format("handshake with {} failed: {}", spec.command[0], e.what()));
  }
  return c;
}

McpClient::~McpClient() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

void McpClient::send(const Json& msg) { write_all(to_child_, msg.dump() + "\n"); }

bool McpClient::read_line(std::string& line, TimePoint deadline) {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return true;
    }
    auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - SteadyClock::now()).count();
    if (wait <= 0) return false;
    pollfd p{from_child_, POLLIN, 0};
    int r = ::poll(&p, 1, static_cast<int>(std::min<long long>(wait, 1000)));
    if (r < 0 && errno != EINTR) throw RemoteError("poll failed");
    if (r <= 0) continue;
    char buf[4096];
    ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw RemoteError("remote server closed its output");
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

Json McpClient::request(const std::string& method, const Json& params, TimePoint deadline) {
  const long long id = next_id_++;
  send(Json{{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", params}});
  std::string line;
  while (read_line(line, deadline)) {
    if (line.empty()) continue;
    Json msg;
    try {
      msg = Json::parse(line);
    } catch (const Json::parse_error&) {
      continue;
    }
    if (!msg.is_object() || !msg.contains("id") || msg["id"] != id) continue;
    if (msg.contains("error")) {
      const auto& err = msg["error"];
      throw RemoteError(fmt::format("{} failed: {} ({})", method, err.value("message", std::string("error")),
                                    err.value("code", 0)));
    }
    return msg.value("result", Json::object());
  }
  throw RemoteError(method + " timed out");
}

Json McpClient::call_tool(const std::string& name, const Json& arguments, double timeout_s) {
  std::lock_guard lock(mu_);
  return request("tools/call", Json{{"name", name}, {"arguments", arguments}}, SteadyClock::now() + to_millis(timeout_s));
}

std::vector<ToolDef> connect_remote_toolkit(const RemoteSpec& spec) {
  return tool_defs(McpClient::connect(spec), spec.command.empty() ? "" : spec.command[0]);
}

ToolkitFactory remote_toolkit_factory(const RemoteSpec& spec) {
  auto client = McpClient::connect(spec);
  ToolkitFactory f;
  f.description = "Remote tools from " + spec.command[0];
  for (const auto& t : client->tools()) f.tools.push_back(t.value("name", ""));
  const auto label = spec.command[0];
  f.make = [client, label](const Json&, const std::shared_ptr<env::Environment>&) { return tool_defs(client, label); };
  return f;
}

}  // namespace agentkit::tools
