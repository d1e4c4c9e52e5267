// SPDX-License-Identifier: Apache-2.0
#include "agentkit/rollout/export.hpp"

#include <sstream>

#include "agentkit/runtime/episode.hpp"

namespace agentkit::rollout {
namespace {

Json turn_json(const ExportTurn& t) {
  Json j{{"role", t.role}, {"content", t.content}};
  if (t.tool_calls) j["tool_calls"] = *t.tool_calls;
  j["tokens_in"] = t.tokens_in;
  j["tokens_out"] = t.tokens_out;
  return j;
}

Json item_json(const ExportItem& it) {
  Json turns = Json::array();
  for (const auto& t : it.turns) turns.push_back(turn_json(t));
  return Json{{"task_id", it.task_id},
              {"trajectory_ref", it.trajectory_ref},
              {"reward", it.reward},
              {"advantage", it.advantage},
              {"turns", turns}};
}

Json header_json(const TrainingBatch& b) {
  return Json{{"batch_id", b.batch_id},
              {"job_id", b.job_id},
              {"estimator", to_string(b.estimator)},
              {"stats", {{"groups", b.groups}, {"items", b.items.size()}, {"filtered_turn_count", b.filtered_turn_count}}}};
}

ExportItem item_from_json(const Json& j) {
  ExportItem it;
  it.task_id = j.at("task_id").get<std::string>();
  it.trajectory_ref = j.at("trajectory_ref").get<std::string>();
  it.reward = j.at("reward").get<double>();
  it.advantage = j.at("advantage").get<double>();
  for (const auto& t : j.at("turns")) {
    ExportTurn et;
    et.role = t.at("role").get<std::string>();
    et.content = t.at("content").get<std::string>();
    if (t.contains("tool_calls")) et.tool_calls = t["tool_calls"];
    et.tokens_in = t.at("tokens_in").get<long long>();
    et.tokens_out = t.at("tokens_out").get<long long>();
    it.turns.push_back(std::move(et));
  }
  return it;
}

}  // namespace

TrainingBatch build_batch(const std::string& job_id, const std::vector<ScoredGroup>& groups, Estimator estimator) {
  TrainingBatch b;
  b.batch_id = job_id + "-" + to_string(estimator);
  b.job_id = job_id;
  b.estimator = estimator;
  b.groups = groups.size();
  for (const auto& g : groups) {
    if (g.rewards.size() != g.trajectories.size()) throw Error("group " + g.task_id + " is not fully scored");
    auto adv = compute_advantages(g.rewards, estimator);
    for (std::size_t i = 0; i < g.trajectories.size(); ++i) {
      auto marked = runtime::mark_invalid_turns(g.trajectories[i]);
      ExportItem item;
      item.task_id = g.task_id;
      item.trajectory_ref = marked.episode_id;
      item.reward = g.rewards[i];
      item.advantage = adv[i];
      for (const auto& t : marked.turns) {
        if (!t.valid) {
          ++b.filtered_turn_count;
          continue;
        }
        if (!t.is_assistant()) continue;
        ExportTurn et;
        et.role = "assistant";
        et.content = t.payload.value("content", "");
        if (t.kind == runtime::TurnKind::assistant_tool_calls) et.tool_calls = t.payload.value("tool_calls", Json::array());
        et.tokens_in = t.tokens_in;
        et.tokens_out = t.tokens_out;
        item.turns.push_back(std::move(et));
      }
      b.items.push_back(std::move(item));
    }
  }
  return b;
}

std::string to_jsonl(const TrainingBatch& batch) {
  std::string out = header_json(batch).dump() + "\n";
  for (const auto& it : batch.items) out += item_json(it).dump() + "\n";
  return out;
}

TrainingBatch parse_jsonl(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error("empty batch");
  auto h = Json::parse(line);
  TrainingBatch b;
  b.batch_id = h.at("batch_id").get<std::string>();
  b.job_id = h.at("job_id").get<std::string>();
  b.estimator = estimator_from_string(h.at("estimator").get<std::string>());
  b.groups = h.at("stats").at("groups").get<std::size_t>();
  b.filtered_turn_count = h.at("stats").at("filtered_turn_count").get<std::size_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    b.items.push_back(item_from_json(Json::parse(line)));
  }
  if (b.items.size() != h.at("stats").at("items").get<std::size_t>()) throw Error("batch item count does not match header");
  return b;
}

Json to_json(const TrainingBatch& batch) {
  Json j = header_json(batch);
  Json items = Json::array();
  for (const auto& it : batch.items) items.push_back(item_json(it));
  j["items"] = items;
  return j;
}

}  // namespace agentkit::rollout
