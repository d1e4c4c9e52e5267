// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agentkit/common/json.hpp"

namespace agentkit::runtime {

enum class TurnKind { assistant_text, assistant_tool_calls, tool_result, system_note };
enum class Termination { answered, max_turns, episode_timeout, fatal_error };

const char* to_string(TurnKind k);
const char* to_string(Termination t);
TurnKind turn_kind_from_string(const std::string& s);
Termination termination_from_string(const std::string& s);

/// Payload shapes by kind:
///   assistant_text        {"content"}
///   assistant_tool_calls  {"content", "tool_calls": [{"id","name","arguments"}]}
///   tool_result           {"id", "tool_name", "status", "content"}
///   system_note           {"event", "message"}
struct Turn {
  TurnKind kind = TurnKind::system_note;
  Json payload = Json::object();
  long long tokens_in = 0;
  long long tokens_out = 0;
  /// "reported" (server usage) or "estimated" (byte heuristic); empty for non-model turns.
  std::string usage_source;
  long long wall_time_ms = 0;
  bool valid = true;
  /// Why the filter flagged the turn.
  std::string invalid_reason;

  bool operator==(const Turn&) const = default;

  bool is_assistant() const { return kind == TurnKind::assistant_text || kind == TurnKind::assistant_tool_calls; }
};

struct Trajectory {
  std::string episode_id;
  std::string task;
  std::vector<Turn> turns;
  std::optional<std::string> final_answer;
  std::optional<double> reward;
  Termination termination = Termination::fatal_error;
  std::string config_fingerprint;
  long long wall_time_ms = 0;
  /// Message for fatal_error terminations.
  std::string error;

  bool operator==(const Trajectory&) const = default;

  std::size_t tool_call_count() const;
  std::size_t assistant_turn_count() const;
};

Json to_json(const Turn& t);
Turn turn_from_json(const Json& j);
Json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const Json& j);

/// Returns "" if tool_result turns only follow the assistant_tool_calls turn that
/// issued them, in order, with matching ids, and every call gets exactly one result.
std::string check_alternation(const Trajectory& t);

}  // namespace agentkit::runtime
