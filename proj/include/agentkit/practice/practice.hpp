// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agentkit/eval/eval.hpp"

namespace agentkit::practice {

class PracticeError : public Error {
 public:
  using Error::Error;
};

class MissingGroundTruth : public PracticeError {
 public:
  using PracticeError::PracticeError;
};

class DistillError : public PracticeError {
 public:
  using PracticeError::PracticeError;
};

inline constexpr std::size_t kDefaultBankCapacity = 32;
inline constexpr std::size_t kDefaultEntryWords = 64;

struct ExperienceEntry {
  std::string id;
  std::string text;
  int epoch_added = 0;
  int last_modified_epoch = 0;
  std::string origin_task_id;

  bool operator==(const ExperienceEntry&) const = default;
};

struct BankEdit {
  enum class Op { add, revise, remove, keep };
  Op op = Op::keep;
  std::string target_id;
  std::string text;

  bool operator==(const BankEdit&) const = default;
};

const char* to_string(BankEdit::Op op);
Json to_json(const BankEdit& e);
BankEdit bank_edit_from_json(const Json& j);

struct RejectedEdit {
  BankEdit edit;
  std::string reason;
};

/// Ordered, bounded list of learned experiences. Ids are E1, E2, ... and never reused.
class ExperienceBank {
 public:
  explicit ExperienceBank(std::size_t capacity = kDefaultBankCapacity, std::size_t max_words = kDefaultEntryWords);

  const std::vector<ExperienceEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t max_words() const { return max_words_; }
  const ExperienceEntry* find(const std::string& id) const;

  /// Entry texts in order, as injected into the system prompt.
  std::vector<std::string> texts() const;

  /// Applies edits in order. Invalid ones (unknown target, empty or overlong
  /// text) are skipped and returned. A full bank evicts its oldest entry on add.
  std::vector<RejectedEdit> apply(const std::vector<BankEdit>& edits, int epoch, const std::string& task_id);

  Json to_json() const;
  static ExperienceBank from_json(const Json& j);

  bool operator==(const ExperienceBank&) const = default;

 private:
  std::size_t capacity_;
  std::size_t max_words_;
  std::uint64_t next_id_ = 1;
  std::vector<ExperienceEntry> entries_;
};

/// Writes a bank snapshot; refuses to overwrite an existing one.
void write_snapshot(const ExperienceBank& bank, const std::filesystem::path& path);
ExperienceBank read_snapshot(const std::filesystem::path& path);
std::filesystem::path snapshot_path(const std::filesystem::path& banks_root, const std::string& run_id, int epoch);

struct RolloutGroup {
  std::string task_id;
  std::string task;
  std::optional<std::string> ground_truth;
  std::vector<runtime::Trajectory> trajectories;
  std::vector<double> rewards;
  std::optional<std::string> semantic_advantage;
};

struct GroupOptions {
  int group_size = 5;
  double temperature = 0.7;
  std::size_t concurrency = 64;
  /// Member i runs with seed base_seed + i.
  std::int64_t base_seed = 0;
};

/// Runs G independent episodes of one task with the bank injected. Failed
/// episodes stay in the group with their termination; rewards are left empty.
RolloutGroup rollout_group(const config::AgentConfig& cfg, const std::string& task_id, const std::string& task,
                           const std::optional<std::string>& ground_truth, const ExperienceBank& bank,
                           const GroupOptions& options, const runtime::RuntimeDeps& deps);

enum class ScoreMode { ground_truth, self_consistency };

const char* to_string(ScoreMode m);
ScoreMode score_mode_from_string(const std::string& s);

/// ground_truth: 1 for a normalized match, else 0. self_consistency: the
/// majority answer among answered trajectories gets 1, tied majorities 0.5.
/// Non-answered trajectories always get 0.
void score_group(RolloutGroup& g, ScoreMode mode);

struct DistillOptions {
  double temperature = 0.3;
  /// Send full transcripts instead of answer and tool-call summaries.
  bool full_transcripts = false;
  std::size_t max_arg_chars = 80;
};

/// Condensed view of one scored attempt as shown to the distiller.
std::string summarize_attempt(const runtime::Trajectory& t, double reward, const DistillOptions& options);

/// Parses the first fenced json block (or the whole reply) into edits.
std::vector<BankEdit> parse_edits(const std::string& reply);

/// Empty if every reward is equal. Otherwise one gateway call, plus one
/// re-prompt if the reply does not parse; throws DistillError after that.
std::vector<BankEdit> distill_semantic_advantage(RolloutGroup& g, const ExperienceBank& bank, llm::Gateway& gw,
                                                 const DistillOptions& options = {});

struct EpochStats {
  int epoch = 0;
  std::size_t episodes = 0;
  double mean_reward = 0.0;
  double mean_tool_calls = 0.0;
  std::size_t groups_distilled = 0;
  std::size_t groups_skipped = 0;
  std::size_t edits_applied = 0;
  std::size_t edits_rejected = 0;
  std::size_t task_failures = 0;
  std::size_t bank_size = 0;
};

struct PracticeReport {
  std::string run_id;
  std::vector<EpochStats> epochs;
  /// Bank after epoch n is snapshots[n]; snapshots[0] is the starting bank.
  std::vector<Json> snapshots;
  std::vector<std::string> log;

  Json to_json() const;
};

struct PracticeOptions {
  int epochs = 3;
  GroupOptions group;
  /// Unset picks ground_truth per task when it has an answer.
  std::optional<ScoreMode> mode;
  DistillOptions distill;
  std::size_t capacity = kDefaultBankCapacity;
  std::size_t max_words = kDefaultEntryWords;
  std::string run_id = "run";
  /// When set, snapshots go to <banks_root>/<run_id>/epoch_<n>.json.
  std::optional<std::filesystem::path> banks_root;
  std::optional<ExperienceBank> initial_bank;
};

/// Epoch loop. All groups of an epoch roll out concurrently against the bank
/// as it stood at the start of the epoch; scoring, distillation and edits
/// then run task by task in dataset order.
std::pair<ExperienceBank, PracticeReport> practice_run(const config::AgentConfig& cfg,
                                                       const std::vector<eval::EvalTask>& dataset,
                                                       const PracticeOptions& options, const runtime::RuntimeDeps& deps);

/// eval::evaluate with the bank injected and the test temperature applied.
eval::MetricsReport test_with_bank(const config::AgentConfig& cfg, const ExperienceBank& bank,
                                   const std::vector<eval::EvalTask>& tasks, double temperature,
                                   const eval::EvalOptions& options, const runtime::RuntimeDeps& deps);

}  // namespace agentkit::practice
