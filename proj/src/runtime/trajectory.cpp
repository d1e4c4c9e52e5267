// SPDX-License-Identifier: Apache-2.0
#include "agentkit/runtime/trajectory.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace agentkit::runtime {

const char* to_string(TurnKind k) {
  switch (k) {
    case TurnKind::assistant_text: return "assistant_text";
    case TurnKind::assistant_tool_calls: return "assistant_tool_calls";
    case TurnKind::tool_result: return "tool_result";
    case TurnKind::system_note: return "system_note";
  }
  return "unknown";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::answered: return "answered";
    case Termination::max_turns: return "max_turns";
    case Termination::episode_timeout: return "episode_timeout";
    case Termination::fatal_error: return "fatal_error";
  }
  return "unknown";
}

TurnKind turn_kind_from_string(const std::string& s) {
  for (auto k : {TurnKind::assistant_text, TurnKind::assistant_tool_calls, TurnKind::tool_result, TurnKind::system_note})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown turn kind: " + s);
}

Termination termination_from_string(const std::string& s) {
  for (auto t : {Termination::answered, Termination::max_turns, Termination::episode_timeout, Termination::fatal_error})
    if (s == to_string(t)) return t;
  throw std::invalid_argument("unknown termination: " + s);
}

std::size_t Trajectory::tool_call_count() const {
  std::size_t n = 0;
  for (const auto& t : turns)
    if (t.kind == TurnKind::assistant_tool_calls) n += t.payload.value("tool_calls", Json::array()).size();
  return n;
}

std::size_t Trajectory::assistant_turn_count() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += t.is_assistant() ? 1 : 0;
  return n;
}

Json to_json(const Turn& t) {
  Json j{{"kind", to_string(t.kind)},
         {"payload", t.payload},
         {"tokens_in", t.tokens_in},
         {"tokens_out", t.tokens_out},
         {"usage_source", t.usage_source},
         {"wall_time_ms", t.wall_time_ms},
         {"valid", t.valid}};
  if (!t.invalid_reason.empty()) j["invalid_reason"] = t.invalid_reason;
  return j;
}

Turn turn_from_json(const Json& j) {
  Turn t;
  t.kind = turn_kind_from_string(j.at("kind").get<std::string>());
  t.payload = j.value("payload", Json::object());
  t.tokens_in = j.value("tokens_in", 0LL);
  t.tokens_out = j.value("tokens_out", 0LL);
  t.usage_source = j.value("usage_source", "");
  t.wall_time_ms = j.value("wall_time_ms", 0LL);
  t.valid = j.value("valid", true);
  t.invalid_reason = j.value("invalid_reason", "");
  return t;
}

Json to_json(const Trajectory& t) {
  Json turns = Json::array();
  for (const auto& turn : t.turns) turns.push_back(to_json(turn));
  Json j{{"episode_id", t.episode_id},
         {"task", t.task},
         {"turns", turns},
         {"final_answer", t.final_answer ? Json(*t.final_answer) : Json()},
         {"reward", t.reward ? Json(*t.reward) : Json()},
         {"termination", to_string(t.termination)},
         {"config_fingerprint", t.config_fingerprint},
         {"wall_time_ms", t.wall_time_ms}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  Trajectory t;
  t.episode_id = j.at("episode_id").get<std::string>();
  t.task = j.value("task", "");
  for (const auto& turn : j.value("turns", Json::array())) t.turns.push_back(turn_from_json(turn));
  if (j.contains("final_answer") && !j["final_answer"].is_null()) t.final_answer = j["final_answer"].get<std::string>();
  if (j.contains("reward") && !j["reward"].is_null()) t.reward = j["reward"].get<double>();
  t.termination = termination_from_string(j.at("termination").get<std::string>());
  t.config_fingerprint = j.value("config_fingerprint", "");
  t.wall_time_ms = j.value("wall_time_ms", 0LL);
  t.error = j.value("error", "");
  return t;
}

std::string check_alternation(const Trajectory& t) {
  std::vector<std::string> pending;
  std::size_t next = 0;
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    const auto& turn = t.turns[i];
    if (turn.kind == TurnKind::tool_result) {
      if (next >= pending.size()) return fmt::format("turn {}: tool_result without a pending tool call", i);
      const auto id = turn.payload.value("id", "");
      if (id != pending[next]) return fmt::format("turn {}: tool_result id '{}' does not match call '{}'", i, id, pending[next]);
      ++next;
      continue;
    }
    if (next < pending.size()) return fmt::format("turn {}: {} before all tool results arrived", i, to_string(turn.kind));
    pending.clear();
    next = 0;
    if (turn.kind == TurnKind::assistant_tool_calls) {
      for (const auto& c : turn.payload.value("tool_calls", Json::array())) pending.push_back(c.value("id", ""));
      if (pending.empty()) return fmt::format("turn {}: assistant_tool_calls without calls", i);
    }
  }
  if (next < pending.size()) return "trajectory ends with unanswered tool calls";
  return {};
}

}  // namespace agentkit::runtime
