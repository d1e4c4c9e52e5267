// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentkit/runtime/episode.hpp"

namespace agentkit::eval {

class DatasetError : public Error {
 public:
  DatasetError(std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct EvalTask {
  std::string id;
  std::string task;
  std::optional<std::string> answer;
  std::vector<std::string> attachments;
};

/// JSON Lines with {id, task, answer?, attachments?}. Blank lines are skipped;
/// a missing id defaults to the 1-based line number.
std::vector<EvalTask> parse_dataset(std::string_view text);
std::vector<EvalTask> load_dataset(const std::filesystem::path& path);

/// Trim, casefold, collapse whitespace, strip trailing periods and
/// canonicalize decimal integers ("0,042" -> "42").
std::string normalize_answer(std::string_view text);

bool answer_matches(const std::optional<std::string>& final_answer, const std::string& ground_truth);

enum class Metric { pass_at_1, mean_at_k };

const char* to_string(Metric m);
Metric metric_from_string(const std::string& s);

struct TaskResult {
  std::string id;
  /// 1 or 0 per attempt, in attempt order.
  std::vector<int> correct;
  std::vector<std::optional<std::string>> answers;
  std::vector<std::string> terminations;
  double score = 0.0;
};

struct MetricsReport {
  Metric metric = Metric::pass_at_1;
  int k = 1;
  std::vector<TaskResult> per_task;
  double aggregate = 0.0;
  double mean_turns = 0.0;
  double mean_tool_calls = 0.0;
  /// Episodes that did not end as answered.
  std::size_t failures = 0;
  /// Episodes that ended as answered and were scored against the answer.
  std::size_t scored = 0;
  std::string config_fingerprint;
  std::string transport;
  std::optional<double> temperature;

  Json to_json() const;
};

struct EvalOptions {
  Metric metric = Metric::pass_at_1;
  int k = 1;
  std::size_t concurrency = 8;
  /// Attempt j of every task runs with seed base_seed + j.
  std::int64_t base_seed = 0;
};

/// Runs k episodes per task and scores each by normalized exact match.
/// deps.experiences and deps.temperature are passed through to every episode.
MetricsReport evaluate(const config::AgentConfig& cfg, const std::vector<EvalTask>& tasks, const EvalOptions& options,
                       const runtime::RuntimeDeps& deps);

/// Writes <root>/<dataset>/<config_fingerprint>/<timestamp>.json and returns the path.
std::filesystem::path persist_report(const MetricsReport& report, const std::filesystem::path& root,
                                     const std::string& dataset_name);

}  // namespace agentkit::eval
