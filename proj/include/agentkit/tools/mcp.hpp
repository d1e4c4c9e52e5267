// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "agentkit/common/deadline.hpp"
#include "agentkit/tools/catalog.hpp"
#include "agentkit/tools/tool.hpp"

namespace agentkit::tools {

class HandshakeError : public ToolError {
 public:
  using ToolError::ToolError;
};
class RemoteError : public ToolError {
 public:
  using ToolError::ToolError;
};

/// A Model Context Protocol server reached over a child process's stdin/stdout.
struct RemoteSpec {
  std::vector<std::string> command;
  double handshake_timeout_s = 10;
};

/// JSON-RPC 2.0 over newline-delimited stdio: initialize, tools/list, tools/call.
/// Calls are serialized; the child is killed on destruction.
class McpClient {
 public:
  /// Spawns the server and completes initialize + notifications/initialized + tools/list.
  static std::shared_ptr<McpClient> connect(const RemoteSpec& spec);
  ~McpClient();

  McpClient(const McpClient&) = delete;
  McpClient& operator=(const McpClient&) = delete;

  const Json& server_info() const { return server_info_; }
  /// The `tools` array returned by tools/list.
  const Json& tools() const { return tools_; }

  /// tools/call; returns the result object. Throws RemoteError on JSON-RPC errors, timeouts or a dead server.
  Json call_tool(const std::string& name, const Json& arguments, double timeout_s);

 private:
  McpClient() = default;
  Json request(const std::string& method, const Json& params, TimePoint deadline);
  void send(const Json& msg);
  bool read_line(std::string& line, TimePoint deadline);

  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  long long next_id_ = 1;
  Json server_info_;
  Json tools_ = Json::array();
};

/// Connects and turns every listed remote tool into a ToolDef(source=remote_protocol).
std::vector<ToolDef> connect_remote_toolkit(const RemoteSpec& spec);

/// Catalog entry backed by one shared connection, established immediately.
ToolkitFactory remote_toolkit_factory(const RemoteSpec& spec);

}  // namespace agentkit::tools
