// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "agentkit/practice/practice.hpp"
#include "agentkit/rollout/export.hpp"

namespace agentkit::rollout {

class JobNotFound : public Error {
 public:
  using Error::Error;
};

class JobNotDone : public Error {
 public:
  using Error::Error;
};

class ShuttingDown : public Error {
 public:
  using Error::Error;
};

struct JobTask {
  std::string task_id;
  std::string task;
  std::optional<std::string> ground_truth;
};

struct JobSpec {
  config::AgentConfig config;
  /// Where the config came from, for bookkeeping only.
  std::string config_ref;
  std::vector<JobTask> tasks;
  int group_size = 5;
  double temperature = 0.7;
  /// Unset picks ground_truth per task when it has one.
  std::optional<practice::ScoreMode> mode;
};

Json to_json(const JobSpec& spec);
JobSpec job_spec_from_json(const Json& j);

enum class JobStatus { queued, running, done, failed };

const char* to_string(JobStatus s);

struct JobView {
  std::string job_id;
  JobStatus status = JobStatus::queued;
  std::size_t episodes_total = 0;
  std::size_t episodes_completed = 0;
  std::size_t episodes_answered = 0;
  std::size_t groups_scored = 0;
  std::string cause;

  Json to_json() const;
};

struct TaskTrajectory {
  std::string task_id;
  std::size_t index = 0;
  runtime::Trajectory trajectory;
};

struct CollectorOptions {
  std::size_t pool = 64;
  /// Append-only job store; jobs found there are restored on start.
  std::optional<std::filesystem::path> store_dir;
};

/// Runs tasks x G episodes per job on one shared worker pool, taking the next
/// episode from active jobs in round-robin order.
class RolloutCollector {
 public:
  RolloutCollector(runtime::RuntimeDeps deps, CollectorOptions options = {});
  ~RolloutCollector();

  RolloutCollector(const RolloutCollector&) = delete;
  RolloutCollector& operator=(const RolloutCollector&) = delete;

  std::string submit(JobSpec spec);
  JobView status(const std::string& job_id) const;
  std::vector<std::string> job_ids() const;

  /// Finished trajectories in task order, optionally for one task.
  std::vector<TaskTrajectory> trajectories(const std::string& job_id,
                                           const std::optional<std::string>& task_id = std::nullopt) const;
  /// Throws JobNotDone unless the job is done.
  std::vector<ScoredGroup> groups(const std::string& job_id) const;
  TrainingBatch export_batch(const std::string& job_id, Estimator estimator = Estimator::mean_baseline) const;

  /// True once the job is done or failed.
  bool wait(const std::string& job_id, std::chrono::milliseconds timeout) const;

  /// Stops taking work, lets running episodes finish and fails unfinished
  /// jobs with cause "shutdown". Idempotent.
  void shutdown();

  std::size_t pool_size() const { return workers_.size(); }

 private:
  struct Job;
  struct Unit {
    std::shared_ptr<Job> job;
    std::size_t task;
    std::size_t member;
  };

  void worker_loop();
  std::optional<Unit> next_unit_locked();
  void finish_unit(const Unit& u, runtime::Trajectory traj);
  std::shared_ptr<Job> find_locked(const std::string& id) const;
  void append_store(const std::string& job_id, const std::string& file, const Json& line);
  void restore();

  runtime::RuntimeDeps deps_;
  CollectorOptions options_;
  mutable std::mutex mu_;
  mutable std::condition_variable work_cv_;
  mutable std::condition_variable done_cv_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::vector<std::string> order_;
  std::size_t rr_ = 0;
  std::size_t next_id_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace agentkit::rollout
