// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentkit/rollout/advantages.hpp"
#include "agentkit/runtime/trajectory.hpp"

namespace agentkit::rollout {

struct ExportTurn {
  std::string role;
  std::string content;
  /// Present only for turns that issued tool calls.
  std::optional<Json> tool_calls;
  long long tokens_in = 0;
  long long tokens_out = 0;

  bool operator==(const ExportTurn&) const = default;
};

struct ExportItem {
  std::string task_id;
  /// Episode id of the source trajectory.
  std::string trajectory_ref;
  double reward = 0.0;
  double advantage = 0.0;
  std::vector<ExportTurn> turns;

  bool operator==(const ExportItem&) const = default;
};

struct TrainingBatch {
  std::string batch_id;
  std::string job_id;
  Estimator estimator = Estimator::mean_baseline;
  std::vector<ExportItem> items;
  std::size_t groups = 0;
  std::size_t filtered_turn_count = 0;

  bool operator==(const TrainingBatch&) const = default;
};

/// Trajectories of one task with their rewards.
struct ScoredGroup {
  std::string task_id;
  std::vector<runtime::Trajectory> trajectories;
  std::vector<double> rewards;
};

/// Flags invalid turns, drops them, and broadcasts each trajectory's group
/// advantage to its remaining assistant turns.
TrainingBatch build_batch(const std::string& job_id, const std::vector<ScoredGroup>& groups, Estimator estimator);

/// A header line {"batch_id","job_id","estimator","stats"} followed by one line per item.
std::string to_jsonl(const TrainingBatch& batch);
TrainingBatch parse_jsonl(std::string_view text);

/// Single JSON document form served over REST.
Json to_json(const TrainingBatch& batch);

}  // namespace agentkit::rollout
