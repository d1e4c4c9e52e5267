// SPDX-License-Identifier: Apache-2.0
#include "agentkit/practice/practice.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "agentkit/autogen/prompts.hpp"
#include "agentkit/common/text.hpp"
#include "agentkit/common/thread_pool.hpp"

namespace agentkit::practice {

const char* to_string(BankEdit::Op op) {
  switch (op) {
    case BankEdit::Op::add: return "add";
    case BankEdit::Op::revise: return "revise";
    case BankEdit::Op::remove: return "remove";
    case BankEdit::Op::keep: return "keep";
  }
  return "keep";
}

Json to_json(const BankEdit& e) {
  Json j{{"op", to_string(e.op)}};
  if (!e.target_id.empty()) j["target_id"] = e.target_id;
  if (!e.text.empty()) j["text"] = e.text;
  return j;
}

BankEdit bank_edit_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("edit must be an object");
  if (!j.contains("op") || !j["op"].is_string()) throw std::invalid_argument("edit needs a string 'op'");
  BankEdit e;
  const auto op = j["op"].get<std::string>();
  if (op == "add") e.op = BankEdit::Op::add;
  else if (op == "revise") e.op = BankEdit::Op::revise;
  else if (op == "remove") e.op = BankEdit::Op::remove;
  else if (op == "keep") e.op = BankEdit::Op::keep;
  else throw std::invalid_argument("unknown op '" + op + "'");
  if (j.contains("target_id") && !j["target_id"].is_null()) {
    if (!j["target_id"].is_string()) throw std::invalid_argument("'target_id' must be a string");
    e.target_id = j["target_id"].get<std::string>();
  }
  if (j.contains("text") && !j["text"].is_null()) {
    if (!j["text"].is_string()) throw std::invalid_argument("'text' must be a string");
    e.text = j["text"].get<std::string>();
  }
  if ((e.op == BankEdit::Op::revise || e.op == BankEdit::Op::remove) && e.target_id.empty())
    throw std::invalid_argument(op + " needs 'target_id'");
  return e;
}

// ---- bank

ExperienceBank::ExperienceBank(std::size_t capacity, std::size_t max_words) : capacity_(capacity), max_words_(max_words) {
  if (capacity_ == 0) throw std::invalid_argument("bank capacity must be positive");
  if (max_words_ == 0) throw std::invalid_argument("entry word cap must be positive");
}

const ExperienceEntry* ExperienceBank::find(const std::string& id) const {
  for (const auto& e : entries_)
    if (e.id == id) return &e;
  return nullptr;
}

std::vector<std::string> ExperienceBank::texts() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.text);
  return out;
}

std::vector<RejectedEdit> ExperienceBank::apply(const std::vector<BankEdit>& edits, int epoch, const std::string& task_id) {
  std::vector<RejectedEdit> rejected;
  auto check_text = [&](const std::string& t) -> std::string {
    if (text::trim(t).empty()) return "empty text";
    auto words = text::word_count(t);
    if (words > max_words_) return fmt::format("text has {} words, limit is {}", words, max_words_);
    return "";
  };
  for (const auto& e : edits) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ExperienceEntry& x) { return x.id == e.target_id; });
    std::string why;
    switch (e.op) {
      case BankEdit::Op::keep:
        break;
      case BankEdit::Op::add:
        why = check_text(e.text);
        if (!why.empty()) break;
        if (entries_.size() >= capacity_) entries_.erase(entries_.begin());
        entries_.push_back({fmt::format("E{}", next_id_++), text::trim(e.text), epoch, epoch, task_id});
        break;
      case BankEdit::Op::revise:
        if (it == entries_.end()) {
          why = "unknown id " + e.target_id;
          break;
        }
        why = check_text(e.text);
        if (!why.empty()) break;
        it->text = text::trim(e.text);
        it->last_modified_epoch = epoch;
        break;
      case BankEdit::Op::remove:
        if (it == entries_.end()) {
          why = "unknown id " + e.target_id;
          break;
        }
        entries_.erase(it);
        break;
    }
    if (!why.empty()) {
      spdlog::info("rejected {} edit from task {}: {}", to_string(e.op), task_id, why);
      rejected.push_back({e, why});
    }
  }
  return rejected;
}

Json ExperienceBank::to_json() const {
  Json entries = Json::array();
  for (const auto& e : entries_)
    entries.push_back(Json{{"id", e.id},
                           {"text", e.text},
                           {"epoch_added", e.epoch_added},
                           {"last_modified_epoch", e.last_modified_epoch},
                           {"origin_task_id", e.origin_task_id}});
  return Json{{"capacity", capacity_}, {"max_words", max_words_}, {"next_id", next_id_}, {"entries", entries}};
}

ExperienceBank ExperienceBank::from_json(const Json& j) {
  ExperienceBank b(j.at("capacity").get<std::size_t>(), j.at("max_words").get<std::size_t>());
  b.next_id_ = j.at("next_id").get<std::uint64_t>();
  for (const auto& e : j.at("entries")) {
    ExperienceEntry x{e.at("id").get<std::string>(), e.at("text").get<std::string>(), e.at("epoch_added").get<int>(),
                      e.at("last_modified_epoch").get<int>(), e.value("origin_task_id", "")};
    if (x.text.empty()) throw std::invalid_argument("bank entry " + x.id + " is empty");
    b.entries_.push_back(std::move(x));
  }
  if (b.entries_.size() > b.capacity_) throw std::invalid_argument("bank holds more entries than its capacity");
  return b;
}

std::filesystem::path snapshot_path(const std::filesystem::path& banks_root, const std::string& run_id, int epoch) {
  return banks_root / run_id / fmt::format("epoch_{}.json", epoch);
}

void write_snapshot(const ExperienceBank& bank, const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) throw PracticeError("snapshot already exists: " + path.string());
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << bank.to_json().dump(2) << "\n";
  if (!out) throw PracticeError("cannot write " + path.string());
}

ExperienceBank read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PracticeError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ExperienceBank::from_json(Json::parse(ss.str()));
}

// ---- groups

RolloutGroup rollout_group(const config::AgentConfig& cfg, const std::string& task_id, const std::string& task,
                           const std::optional<std::string>& ground_truth, const ExperienceBank& bank,
                           const GroupOptions& options, const runtime::RuntimeDeps& deps) {
  if (options.group_size < 2) throw std::invalid_argument("group size must be at least 2");
  RolloutGroup g;
  g.task_id = task_id;
  g.task = task;
  g.ground_truth = ground_truth;
  g.trajectories.resize(static_cast<std::size_t>(options.group_size));
  auto d = deps;
  d.experiences = bank.texts();
  d.temperature = options.temperature;
  parallel_for(g.trajectories.size(), std::max<std::size_t>(1, options.concurrency), [&](std::size_t i) {
    auto di = d;
    di.seed = options.base_seed + static_cast<std::int64_t>(i);
    g.trajectories[i] = runtime::run_episode(cfg, task, di);
  });
  return g;
}

const char* to_string(ScoreMode m) { return m == ScoreMode::ground_truth ? "ground_truth" : "self_consistency"; }

ScoreMode score_mode_from_string(const std::string& s) {
  if (s == "ground_truth" || s == "gt") return ScoreMode::ground_truth;
  if (s == "self_consistency" || s == "sc") return ScoreMode::self_consistency;
  throw std::invalid_argument("unknown score mode: " + s);
}

void score_group(RolloutGroup& g, ScoreMode mode) {
  const auto n = g.trajectories.size();
  g.rewards.assign(n, 0.0);
  auto answered = [&](std::size_t i) {
    return g.trajectories[i].termination == runtime::Termination::answered && g.trajectories[i].final_answer;
  };
  if (mode == ScoreMode::ground_truth) {
    if (!g.ground_truth) throw MissingGroundTruth("task " + g.task_id + " has no ground truth");
    for (std::size_t i = 0; i < n; ++i)
      if (answered(i) && eval::answer_matches(g.trajectories[i].final_answer, *g.ground_truth)) g.rewards[i] = 1.0;
  } else {
    std::map<std::string, std::size_t> votes;
    for (std::size_t i = 0; i < n; ++i)
      if (answered(i)) ++votes[eval::normalize_answer(*g.trajectories[i].final_answer)];
    std::size_t top = 0, tied = 0;
    for (const auto& [answer, count] : votes) top = std::max(top, count);
    for (const auto& [answer, count] : votes)
      if (count == top) ++tied;
    const double win = tied > 1 ? 0.5 : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (answered(i) && votes[eval::normalize_answer(*g.trajectories[i].final_answer)] == top) g.rewards[i] = win;
  }
  for (std::size_t i = 0; i < n; ++i) g.trajectories[i].reward = g.rewards[i];
}

// ---- distillation

std::string summarize_attempt(const runtime::Trajectory& t, double reward, const DistillOptions& options) {
  std::string out;
  if (options.full_transcripts) {
    for (const auto& turn : t.turns) {
      switch (turn.kind) {
        case runtime::TurnKind::assistant_text:
        case runtime::TurnKind::assistant_tool_calls: {
          out += "  assistant: " + turn.payload.value("content", "") + "\n";
          for (const auto& c : turn.payload.value("tool_calls", Json::array()))
            out += fmt::format("    call {}({})\n", c.value("name", ""), c.value("arguments", ""));
          break;
        }
        case runtime::TurnKind::tool_result:
          out += fmt::format("  {} -> {}\n", turn.payload.value("tool_name", ""), turn.payload.value("content", ""));
          break;
        case runtime::TurnKind::system_note:
          out += "  note: " + turn.payload.value("message", "") + "\n";
          break;
      }
    }
  } else {
    std::vector<std::string> calls;
    for (const auto& turn : t.turns) {
      if (turn.kind != runtime::TurnKind::assistant_tool_calls) continue;
      for (const auto& c : turn.payload.value("tool_calls", Json::array())) {
        auto args = c.value("arguments", "");
        if (args.size() > options.max_arg_chars) args = text::truncate_utf8(args, options.max_arg_chars) + "...";
        calls.push_back(fmt::format("{}({})", c.value("name", ""), args));
      }
    }
    out += calls.empty() ? "  tool calls: none\n" : fmt::format("  tool calls: {}\n", fmt::join(calls, ", "));
  }
  if (t.termination == runtime::Termination::answered && t.final_answer)
    out += "  final answer: " + *t.final_answer + "\n";
  else
    out += fmt::format("  final answer: none (ended with {})\n", runtime::to_string(t.termination));
  return fmt::format("reward {:g}\n", reward) + out;
}

std::vector<BankEdit> parse_edits(const std::string& reply) {
  std::string body;
  if (auto block = text::first_fenced(reply, "json")) body = *block;
  else body = reply;
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("edits")) j = j["edits"];
  if (!j.is_array()) throw std::invalid_argument("expected a JSON list of edits");
  std::vector<BankEdit> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      out.push_back(bank_edit_from_json(j[i]));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("edit {}: {}", i, e.what()));
    }
  }
  return out;
}

std::vector<BankEdit> distill_semantic_advantage(RolloutGroup& g, const ExperienceBank& bank, llm::Gateway& gw,
                                                 const DistillOptions& options) {
  if (g.rewards.size() != g.trajectories.size() || g.rewards.empty())
    throw std::invalid_argument("group must be scored before distillation");
  if (std::all_of(g.rewards.begin(), g.rewards.end(), [&](double r) { return r == g.rewards.front(); })) return {};

  std::string summaries;
  for (std::size_t i = 0; i < g.trajectories.size(); ++i)
    summaries += fmt::format("Attempt {}, {}\n", i + 1, summarize_attempt(g.trajectories[i], g.rewards[i], options));
  std::string bank_text;
  for (const auto& e : bank.entries()) bank_text += fmt::format("[{}] {}\n", e.id, e.text);
  if (bank_text.empty()) bank_text = "(none yet)\n";

  llm::ChatRequest req;
  req.temperature = options.temperature;
  req.messages.push_back(llm::Message::user(text::render_template(
      prompts::get("distill"),
      {{"task", g.task},
       {"ground_truth", g.ground_truth ? "Reference answer: " + *g.ground_truth + "\n" : std::string()},
       {"group_size", std::to_string(g.trajectories.size())},
       {"summaries", summaries},
       {"bank", bank_text},
       {"max_words", std::to_string(bank.max_words())}})));
  std::string error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      reply = gw.complete(req).content.value_or("");
    } catch (const std::exception& e) {
      throw DistillError(std::string("model call failed: ") + e.what());
    }
    try {
      auto edits = parse_edits(reply);
      g.semantic_advantage = reply;
      return edits;
    } catch (const std::invalid_argument& e) {
      error = e.what();
    }
    req.messages.push_back(llm::Message::assistant(reply));
    req.messages.push_back(llm::Message::user(text::render_template(prompts::get("distill_retry"), {{"error", error}})));
  }
  throw DistillError("unparsable edits after re-prompt: " + error);
}

// ---- epoch loop

Json PracticeReport::to_json() const {
  Json epochs_j = Json::array();
  for (const auto& e : epochs)
    epochs_j.push_back(Json{{"epoch", e.epoch},
                            {"episodes", e.episodes},
                            {"mean_reward", e.mean_reward},
                            {"mean_tool_calls", e.mean_tool_calls},
                            {"groups_distilled", e.groups_distilled},
                            {"groups_skipped", e.groups_skipped},
                            {"edits_applied", e.edits_applied},
                            {"edits_rejected", e.edits_rejected},
                            {"task_failures", e.task_failures},
                            {"bank_size", e.bank_size}});
  return Json{{"run_id", run_id}, {"epochs", epochs_j}, {"snapshots", snapshots}, {"log", log}};
}

std::pair<ExperienceBank, PracticeReport> practice_run(const config::AgentConfig& cfg,
                                                       const std::vector<eval::EvalTask>& dataset,
                                                       const PracticeOptions& options, const runtime::RuntimeDeps& deps) {
  if (dataset.empty()) throw std::invalid_argument("practice needs a nonempty dataset");
  if (options.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (options.group.group_size < 2) throw std::invalid_argument("group size must be at least 2");
  if (!deps.gateway) throw std::invalid_argument("practice needs a gateway");

  ExperienceBank bank = options.initial_bank ? *options.initial_bank : ExperienceBank(options.capacity, options.max_words);
  PracticeReport report;
  report.run_id = options.run_id;
  auto snapshot = [&](int epoch) {
    report.snapshots.push_back(bank.to_json());
    if (options.banks_root) write_snapshot(bank, snapshot_path(*options.banks_root, options.run_id, epoch));
  };
  snapshot(0);

  const auto G = static_cast<std::size_t>(options.group.group_size);
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    std::vector<RolloutGroup> groups(dataset.size());
    auto d = deps;
    d.experiences = bank.texts();
    d.temperature = options.group.temperature;
    for (std::size_t t = 0; t < dataset.size(); ++t) {
      groups[t].task_id = dataset[t].id;
      groups[t].task = dataset[t].task;
      groups[t].ground_truth = dataset[t].answer;
      groups[t].trajectories.assign(G, {});
    }
    parallel_for(dataset.size() * G, std::max<std::size_t>(1, options.group.concurrency), [&](std::size_t idx) {
      auto di = d;
      di.seed = options.group.base_seed + static_cast<std::int64_t>(idx % G);
      groups[idx / G].trajectories[idx % G] = runtime::run_episode(cfg, dataset[idx / G].task, di);
    });

    double reward_sum = 0, calls_sum = 0;
    for (auto& g : groups) {
      const auto mode = options.mode.value_or(g.ground_truth ? ScoreMode::ground_truth : ScoreMode::self_consistency);
      try {
        score_group(g, mode);
      } catch (const MissingGroundTruth& e) {
        report.log.push_back(fmt::format("epoch {} task {}: {}", epoch, g.task_id, e.what()));
        ++stats.task_failures;
        g.rewards.assign(G, 0.0);
        for (const auto& tj : g.trajectories) calls_sum += static_cast<double>(tj.tool_call_count());
        stats.episodes += G;
        continue;
      }
      for (std::size_t i = 0; i < G; ++i) {
        reward_sum += g.rewards[i];
        calls_sum += static_cast<double>(g.trajectories[i].tool_call_count());
      }
      stats.episodes += G;
      try {
        auto edits = distill_semantic_advantage(g, bank, *deps.gateway, options.distill);
        if (!g.semantic_advantage) {
          ++stats.groups_skipped;
          continue;
        }
        ++stats.groups_distilled;
        auto rejected = bank.apply(edits, epoch, g.task_id);
        for (const auto& r : rejected)
          report.log.push_back(fmt::format("epoch {} task {}: rejected {} {}: {}", epoch, g.task_id,
                                           to_string(r.edit.op), r.edit.target_id, r.reason));
        std::size_t effective = 0;
        for (const auto& e : edits)
          if (e.op != BankEdit::Op::keep) ++effective;
        stats.edits_rejected += rejected.size();
        stats.edits_applied += effective - std::min(effective, rejected.size());
      } catch (const DistillError& e) {
        spdlog::warn("distillation failed for task {}: {}", g.task_id, e.what());
        report.log.push_back(fmt::format("epoch {} task {}: {}", epoch, g.task_id, e.what()));
        ++stats.task_failures;
      }
    }
    stats.mean_reward = reward_sum / static_cast<double>(stats.episodes);
    stats.mean_tool_calls = calls_sum / static_cast<double>(stats.episodes);
    stats.bank_size = bank.size();
    report.epochs.push_back(stats);
    spdlog::info("epoch {}: mean reward {:.4f}, mean tool calls {:.3f}, bank {}", epoch, stats.mean_reward,
                 stats.mean_tool_calls, bank.size());
    snapshot(epoch);
  }
  return {std::move(bank), std::move(report)};
}

eval::MetricsReport test_with_bank(const config::AgentConfig& cfg, const ExperienceBank& bank,
                                   const std::vector<eval::EvalTask>& tasks, double temperature,
                                   const eval::EvalOptions& options, const runtime::RuntimeDeps& deps) {
  auto d = deps;
  d.experiences = bank.texts();
  d.temperature = temperature;
  return eval::evaluate(cfg, tasks, options, d);
}

}  // namespace agentkit::practice
