// SPDX-License-Identifier: Apache-2.0
#include "agentkit/rollout/collector.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

#include "agentkit/config/yaml_io.hpp"

namespace agentkit::rollout {

struct RolloutCollector::Job {
  std::string id;
  JobSpec spec;
  JobStatus status = JobStatus::queued;
  std::string cause;
  std::deque<std::pair<std::size_t, std::size_t>> pending;
  std::vector<std::vector<std::optional<runtime::Trajectory>>> slots;
  std::vector<std::optional<std::vector<double>>> rewards;
  std::size_t completed = 0;
  std::size_t answered = 0;
  std::size_t running = 0;

  std::size_t total() const { return spec.tasks.size() * static_cast<std::size_t>(spec.group_size); }
  bool terminal() const { return status == JobStatus::done || status == JobStatus::failed; }
};

Json to_json(const JobSpec& spec) {
  Json tasks = Json::array();
  for (const auto& t : spec.tasks) {
    Json j{{"task_id", t.task_id}, {"task", t.task}};
    if (t.ground_truth) j["ground_truth"] = *t.ground_truth;
    tasks.push_back(j);
  }
  Json j{{"config", config::emit_config(spec.config)},
         {"config_ref", spec.config_ref},
         {"tasks", tasks},
         {"group_size", spec.group_size},
         {"temperature", spec.temperature}};
  if (spec.mode) j["mode"] = practice::to_string(*spec.mode);
  return j;
}

JobSpec job_spec_from_json(const Json& j) {
  JobSpec s;
  s.config = config::parse_config(j.at("config").get<std::string>());
  s.config_ref = j.value("config_ref", "");
  for (const auto& t : j.at("tasks")) {
    JobTask jt{t.at("task_id").get<std::string>(), t.at("task").get<std::string>(), std::nullopt};
    if (t.contains("ground_truth") && !t["ground_truth"].is_null()) jt.ground_truth = t["ground_truth"].get<std::string>();
    s.tasks.push_back(std::move(jt));
  }
  s.group_size = j.value("group_size", 5);
  s.temperature = j.value("temperature", 0.7);
  if (j.contains("mode")) s.mode = practice::score_mode_from_string(j["mode"].get<std::string>());
  return s;
}

const char* to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "failed";
}

Json JobView::to_json() const {
  Json j{{"job_id", job_id},
         {"status", rollout::to_string(status)},
         {"progress",
          {{"episodes_total", episodes_total},
           {"episodes_completed", episodes_completed},
           {"episodes_answered", episodes_answered},
           {"groups_scored", groups_scored}}}};
  if (!cause.empty()) j["cause"] = cause;
  return j;
}

RolloutCollector::RolloutCollector(runtime::RuntimeDeps deps, CollectorOptions options)
    : deps_(std::move(deps)), options_(std::move(options)) {
  if (options_.pool == 0) throw std::invalid_argument("pool size must be positive");
  if (options_.store_dir) restore();
  for (std::size_t i = 0; i < options_.pool; ++i) workers_.emplace_back([this] { worker_loop(); });
}

RolloutCollector::~RolloutCollector() { shutdown(); }

std::string RolloutCollector::submit(JobSpec spec) {
  if (spec.tasks.empty()) throw std::invalid_argument("job has no tasks");
  if (spec.group_size < 2) throw practice::PracticeError("group size must be at least 2");
  if (spec.mode == practice::ScoreMode::ground_truth)
    for (const auto& t : spec.tasks)
      if (!t.ground_truth) throw practice::MissingGroundTruth("task " + t.task_id + " has no ground truth");
  std::lock_guard lock(mu_);
  if (stopping_) throw ShuttingDown("collector is shutting down");
  auto job = std::make_shared<Job>();
  job->id = fmt::format("job_{:06d}", next_id_++);
  job->spec = std::move(spec);
  const auto G = static_cast<std::size_t>(job->spec.group_size);
  job->slots.assign(job->spec.tasks.size(), std::vector<std::optional<runtime::Trajectory>>(G));
  job->rewards.assign(job->spec.tasks.size(), std::nullopt);
  for (std::size_t t = 0; t < job->spec.tasks.size(); ++t)
    for (std::size_t m = 0; m < G; ++m) job->pending.emplace_back(t, m);
  jobs_[job->id] = job;
  order_.push_back(job->id);
  append_store(job->id, "job.json", to_json(job->spec));
  append_store(job->id, "status.jsonl", Json{{"status", "queued"}});
  work_cv_.notify_all();
  return job->id;
}

std::optional<RolloutCollector::Unit> RolloutCollector::next_unit_locked() {
  const auto n = order_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto idx = (rr_ + k) % n;
    auto& job = jobs_[order_[idx]];
    if (job->terminal() || job->pending.empty()) continue;
    rr_ = (idx + 1) % n;
    auto [t, m] = job->pending.front();
    job->pending.pop_front();
    return Unit{job, t, m};
  }
  return std::nullopt;
}

void RolloutCollector::worker_loop() {
  for (;;) {
    Unit u;
    {
      std::unique_lock lock(mu_);
      std::optional<Unit> next;
      work_cv_.wait(lock, [&] { return stopping_ || (next = next_unit_locked()).has_value(); });
      if (!next) return;
      u = *next;
      ++u.job->running;
      if (u.job->status == JobStatus::queued) {
        u.job->status = JobStatus::running;
        append_store(u.job->id, "status.jsonl", Json{{"status", "running"}});
      }
    }
    const auto& spec = u.job->spec;
    auto d = deps_;
    d.temperature = spec.temperature;
    d.seed = static_cast<std::int64_t>(u.member);
    runtime::Trajectory traj;
    try {
      traj = runtime::run_episode(spec.config, spec.tasks[u.task].task, d);
    } catch (const std::exception& e) {
      traj.task = spec.tasks[u.task].task;
      traj.termination = runtime::Termination::fatal_error;
      traj.error = std::string("worker failure: ") + e.what();
    } catch (...) {
      traj.task = spec.tasks[u.task].task;
      traj.termination = runtime::Termination::fatal_error;
      traj.error = "worker failure";
    }
    finish_unit(u, std::move(traj));
  }
}

void RolloutCollector::finish_unit(const Unit& u, runtime::Trajectory traj) {
  std::lock_guard lock(mu_);
  auto& job = *u.job;
  --job.running;
  if (job.terminal()) {
    done_cv_.notify_all();
    return;
  }
  ++job.completed;
  if (traj.termination == runtime::Termination::answered) ++job.answered;
  const auto& task = job.spec.tasks[u.task];
  append_store(job.id, "trajectories.jsonl",
               Json{{"task_id", task.task_id}, {"index", u.member}, {"trajectory", runtime::to_json(traj)}});
  job.slots[u.task][u.member] = std::move(traj);

  bool group_full = true;
  for (const auto& s : job.slots[u.task]) group_full = group_full && s.has_value();
  if (group_full) {
    practice::RolloutGroup g;
    g.task_id = task.task_id;
    g.task = task.task;
    g.ground_truth = task.ground_truth;
    for (const auto& s : job.slots[u.task]) g.trajectories.push_back(*s);
    practice::score_group(g, job.spec.mode.value_or(task.ground_truth ? practice::ScoreMode::ground_truth
                                                                      : practice::ScoreMode::self_consistency));
    for (std::size_t i = 0; i < g.rewards.size(); ++i) job.slots[u.task][i]->reward = g.rewards[i];
    job.rewards[u.task] = g.rewards;
    append_store(job.id, "rewards.jsonl", Json{{"task_id", task.task_id}, {"rewards", g.rewards}});
  }
  if (job.completed == job.total()) {
    job.status = JobStatus::done;
    append_store(job.id, "status.jsonl", Json{{"status", "done"}});
  }
  done_cv_.notify_all();
}

std::shared_ptr<RolloutCollector::Job> RolloutCollector::find_locked(const std::string& id) const {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw JobNotFound("no job " + id);
  return it->second;
}

JobView RolloutCollector::status(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto job = find_locked(job_id);
  JobView v;
  v.job_id = job->id;
  v.status = job->status;
  v.episodes_total = job->total();
  v.episodes_completed = job->completed;
  v.episodes_answered = job->answered;
  for (const auto& r : job->rewards) v.groups_scored += r.has_value() ? 1 : 0;
  v.cause = job->cause;
  return v;
}

std::vector<std::string> RolloutCollector::job_ids() const {
  std::lock_guard lock(mu_);
  return order_;
}

std::vector<TaskTrajectory> RolloutCollector::trajectories(const std::string& job_id,
                                                           const std::optional<std::string>& task_id) const {
  std::lock_guard lock(mu_);
  auto job = find_locked(job_id);
  std::vector<TaskTrajectory> out;
  for (std::size_t t = 0; t < job->slots.size(); ++t) {
    if (task_id && job->spec.tasks[t].task_id != *task_id) continue;
    for (std::size_t m = 0; m < job->slots[t].size(); ++m)
      if (job->slots[t][m]) out.push_back({job->spec.tasks[t].task_id, m, *job->slots[t][m]});
  }
  return out;
}

std::vector<ScoredGroup> RolloutCollector::groups(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto job = find_locked(job_id);
  if (job->status != JobStatus::done) throw JobNotDone("job " + job_id + " is " + to_string(job->status));
  std::vector<ScoredGroup> out;
  for (std::size_t t = 0; t < job->slots.size(); ++t) {
    ScoredGroup g;
    g.task_id = job->spec.tasks[t].task_id;
    for (const auto& s : job->slots[t]) g.trajectories.push_back(*s);
    g.rewards = *job->rewards[t];
    out.push_back(std::move(g));
  }
  return out;
}

TrainingBatch RolloutCollector::export_batch(const std::string& job_id, Estimator estimator) const {
  return build_batch(job_id, groups(job_id), estimator);
}

bool RolloutCollector::wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  auto job = find_locked(job_id);
  return done_cv_.wait_for(lock, timeout, [&] { return job->terminal(); });
}

void RolloutCollector::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    stopping_ = true;
  }
  work_cv_.notify_all();
  for (auto& w : workers_)
    if (w.joinable()) w.join();
  std::lock_guard lock(mu_);
  for (auto& [id, job] : jobs_) {
    if (job->terminal()) continue;
    job->status = JobStatus::failed;
    job->cause = "shutdown";
    job->pending.clear();
    append_store(id, "status.jsonl", Json{{"status", "failed"}, {"cause", "shutdown"}});
  }
  done_cv_.notify_all();
}

void RolloutCollector::append_store(const std::string& job_id, const std::string& file, const Json& line) {
  if (!options_.store_dir) return;
  auto dir = *options_.store_dir / job_id;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / file, std::ios::app | std::ios::binary);
  out << line.dump() << "\n";
  if (!out) spdlog::error("job store write failed for {}/{}", job_id, file);
}

void RolloutCollector::restore() {
  const auto& root = *options_.store_dir;
  if (!std::filesystem::exists(root)) return;
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(root))
    if (e.is_directory() && std::filesystem::exists(e.path() / "job.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  auto read_lines = [](const std::filesystem::path& p) {
    std::vector<Json> out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) out.push_back(Json::parse(line));
    return out;
  };
  for (const auto& dir : dirs) {
    try {
      auto job = std::make_shared<Job>();
      job->id = dir.filename().string();
      job->spec = job_spec_from_json(read_lines(dir / "job.json").at(0));
      const auto G = static_cast<std::size_t>(job->spec.group_size);
      job->slots.assign(job->spec.tasks.size(), std::vector<std::optional<runtime::Trajectory>>(G));
      job->rewards.assign(job->spec.tasks.size(), std::nullopt);
      std::map<std::string, std::size_t> index;
      for (std::size_t t = 0; t < job->spec.tasks.size(); ++t) index[job->spec.tasks[t].task_id] = t;
      for (const auto& l : read_lines(dir / "trajectories.jsonl")) {
        auto t = index.at(l.at("task_id").get<std::string>());
        auto traj = runtime::trajectory_from_json(l.at("trajectory"));
        if (traj.termination == runtime::Termination::answered) ++job->answered;
        job->slots[t].at(l.at("index").get<std::size_t>()) = std::move(traj);
        ++job->completed;
      }
      for (const auto& l : read_lines(dir / "rewards.jsonl")) {
        auto t = index.at(l.at("task_id").get<std::string>());
        auto r = l.at("rewards").get<std::vector<double>>();
        for (std::size_t i = 0; i < r.size(); ++i)
          if (job->slots[t][i]) job->slots[t][i]->reward = r[i];
        job->rewards[t] = std::move(r);
      }
      auto statuses = read_lines(dir / "status.jsonl");
      const auto last = statuses.empty() ? std::string("queued") : statuses.back().at("status").get<std::string>();
      if (last == "done") {
        job->status = JobStatus::done;
      } else {
        job->status = JobStatus::failed;
        job->cause = statuses.empty() ? "interrupted" : statuses.back().value("cause", "interrupted");
        if (last != "failed") append_store(job->id, "status.jsonl", Json{{"status", "failed"}, {"cause", "interrupted"}});
      }
      unsigned long long n = 0;
      if (std::sscanf(job->id.c_str(), "job_%llu", &n) == 1) next_id_ = std::max<std::size_t>(next_id_, n + 1);
      jobs_[job->id] = job;
      order_.push_back(job->id);
    } catch (const std::exception& e) {
      spdlog::warn("skipping unreadable job store {}: {}", dir.string(), e.what());
    }
  }
}

}  // namespace agentkit::rollout
