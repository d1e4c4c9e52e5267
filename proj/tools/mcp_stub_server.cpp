// SPDX-License-Identifier: Apache-2.0
// Minimal MCP server over stdio used by tests: one `echo` tool.
//   --silent   read requests but never answer
//   --slow MS  sleep before every tools/call reply
#include <chrono>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>

#include "agentkit/common/json.hpp"

using agentkit::Json;

int main(int argc, char** argv) {
  bool silent = false;
  long slow_ms = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--silent") == 0) silent = true;
    else if (std::strcmp(argv[i], "--slow") == 0 && i + 1 < argc) slow_ms = std::stol(argv[++i]);
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    if (silent) continue;
    Json msg;
    try {
      msg = Json::parse(line);
    } catch (const Json::parse_error&) {
      std::cout << Json{{"jsonrpc", "2.0"}, {"id", nullptr}, {"error", {{"code", -32700}, {"message", "parse error"}}}}.dump()
                << std::endl;
      continue;
    }
    if (!msg.contains("id")) continue;
    const auto method = msg.value("method", std::string());
    Json reply{{"jsonrpc", "2.0"}, {"id", msg["id"]}};
    if (method == "initialize") {
      reply["result"] = {{"protocolVersion", "2024-11-05"},
                         {"capabilities", {{"tools", Json::object()}}},
                         {"serverInfo", {{"name", "mcp-stub"}, {"version", "1.0"}}}};
    } else if (method == "tools/list") {
      reply["result"] = {{"tools",
                          Json::array({{{"name", "echo"},
                                        {"description", "Echo the given text back."},
                                        {"inputSchema",
                                         {{"type", "object"},
                                          {"properties", {{"text", {{"type", "string"}}}}},
                                          {"required", {"text"}}}}}})}};
    } else if (method == "tools/call") {
      if (slow_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(slow_ms));
      const auto params = msg.value("params", Json::object());
      if (params.value("name", "") != "echo") {
        reply["error"] = {{"code", -32602}, {"message", "unknown tool"}};
      } else {
        const auto text = params.value("arguments", Json::object()).value("text", std::string());
        reply["result"] = {{"content", Json::array({{{"type", "text"}, {"text", text}}})}, {"isError", false}};
      }
    } else if (method == "ping") {
      reply["result"] = Json::object();
    } else {
      reply["error"] = {{"code", -32601}, {"message", "method not found"}};
    }
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}
