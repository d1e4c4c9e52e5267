// SPDX-License-Identifier: Apache-2.0
#include "agentkit/eval/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>

#include "agentkit/common/text.hpp"
#include "agentkit/common/thread_pool.hpp"
#include "agentkit/config/yaml_io.hpp"

namespace agentkit::eval {

DatasetError::DatasetError(std::size_t line, const std::string& msg)
    : Error(fmt::format("dataset line {}: {}", line, msg)), line_(line) {}

std::vector<EvalTask> parse_dataset(std::string_view text) {
  std::vector<EvalTask> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw DatasetError(n, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw DatasetError(n, "expected a JSON object");
    if (!j.contains("task") || !j["task"].is_string()) throw DatasetError(n, "missing string field 'task'");
    EvalTask t;
    t.task = j["task"].get<std::string>();
    if (j.contains("id")) {
      if (j["id"].is_string()) t.id = j["id"].get<std::string>();
      else if (j["id"].is_number_integer()) t.id = std::to_string(j["id"].get<long long>());
      else throw DatasetError(n, "'id' must be a string or integer");
    } else {
      t.id = std::to_string(n);
    }
    if (j.contains("answer") && !j["answer"].is_null()) {
      if (j["answer"].is_string()) t.answer = j["answer"].get<std::string>();
      else if (j["answer"].is_number()) t.answer = j["answer"].dump();
      else throw DatasetError(n, "'answer' must be a string or number");
    }
    if (j.contains("attachments")) {
      if (!j["attachments"].is_array()) throw DatasetError(n, "'attachments' must be a list");
      for (const auto& a : j["attachments"]) {
        if (!a.is_string()) throw DatasetError(n, "attachment paths must be strings");
        t.attachments.push_back(a.get<std::string>());
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<EvalTask> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(0, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

namespace {

bool is_grouped_integer(const std::string& s) {
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i])) && s[i] != ',') return false;
  return true;
}

}  // namespace

std::string normalize_answer(std::string_view raw) {
  std::string s = text::to_lower(raw);
  std::string collapsed;
  for (const auto& w : text::split_words(s)) {
    if (!collapsed.empty()) collapsed += ' ';
    collapsed += w;
  }
  while (!collapsed.empty() && (collapsed.back() == '.' || collapsed.back() == ' ')) collapsed.pop_back();
  if (!is_grouped_integer(collapsed)) return collapsed;
  bool negative = collapsed[0] == '-';
  std::string digits;
  for (char c : collapsed)
    if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
  auto first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  if (negative && digits != "0") digits.insert(digits.begin(), '-');
  return digits;
}

bool answer_matches(const std::optional<std::string>& final_answer, const std::string& ground_truth) {
  return final_answer && normalize_answer(*final_answer) == normalize_answer(ground_truth);
}

const char* to_string(Metric m) { return m == Metric::pass_at_1 ? "pass_at_1" : "mean_at_k"; }

Metric metric_from_string(const std::string& s) {
  if (s == "pass_at_1" || s == "pass@1") return Metric::pass_at_1;
  if (s == "mean_at_k" || s == "mean@k") return Metric::mean_at_k;
  throw std::invalid_argument("unknown metric: " + s);
}

Json MetricsReport::to_json() const {
  Json tasks = Json::array();
  for (const auto& t : per_task) {
    Json answers = Json::array();
    for (const auto& a : t.answers) answers.push_back(a ? Json(*a) : Json(nullptr));
    tasks.push_back(Json{{"id", t.id},
                         {"correct", t.correct},
                         {"answers", answers},
                         {"terminations", t.terminations},
                         {"score", t.score}});
  }
  Json j{{"metric", eval::to_string(metric)},
         {"k", k},
         {"per_task", tasks},
         {"aggregate", aggregate},
         {"mean_turns", mean_turns},
         {"mean_tool_calls", mean_tool_calls},
         {"failures", failures},
         {"scored", scored},
         {"config_fingerprint", config_fingerprint},
         {"transport", transport}};
  if (temperature) j["temperature"] = *temperature;
  return j;
}

MetricsReport evaluate(const config::AgentConfig& cfg, const std::vector<EvalTask>& tasks, const EvalOptions& options,
                       const runtime::RuntimeDeps& deps) {
  if (options.k < 1) throw std::invalid_argument("k must be >= 1");
  if (options.metric == Metric::pass_at_1 && options.k != 1) throw std::invalid_argument("pass_at_1 requires k = 1");
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!tasks[i].answer) throw DatasetError(i + 1, "task '" + tasks[i].id + "' has no answer to score against");

  const auto k = static_cast<std::size_t>(options.k);
  const std::size_t n = tasks.size() * k;
  std::vector<runtime::Trajectory> trajs(n);
  parallel_for(n, std::max<std::size_t>(1, options.concurrency), [&](std::size_t idx) {
    const auto& t = tasks[idx / k];
    auto d = deps;
    d.seed = options.base_seed + static_cast<std::int64_t>(idx % k);
    std::string prompt = t.task;
    if (!t.attachments.empty()) prompt += fmt::format("\n\nAttached files:\n- {}", fmt::join(t.attachments, "\n- "));
    trajs[idx] = runtime::run_episode(cfg, prompt, d);
  });

  MetricsReport r;
  r.metric = options.metric;
  r.k = options.k;
  r.config_fingerprint = config::config_fingerprint(cfg);
  r.transport = deps.gateway ? llm::to_string(deps.gateway->transport_kind()) : "";
  r.temperature = deps.temperature;
  double turns = 0, calls = 0, total = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    TaskResult tr;
    tr.id = tasks[i].id;
    int ok = 0;
    for (std::size_t a = 0; a < k; ++a) {
      const auto& tj = trajs[i * k + a];
      bool answered = tj.termination == runtime::Termination::answered;
      int c = answered && answer_matches(tj.final_answer, *tasks[i].answer) ? 1 : 0;
      ok += c;
      tr.correct.push_back(c);
      tr.answers.push_back(tj.final_answer);
      tr.terminations.push_back(runtime::to_string(tj.termination));
      if (answered) ++r.scored;
      else ++r.failures;
      turns += static_cast<double>(tj.assistant_turn_count());
      calls += static_cast<double>(tj.tool_call_count());
    }
    tr.score = static_cast<double>(ok) / static_cast<double>(k);
    total += tr.score;
    r.per_task.push_back(std::move(tr));
  }
  if (!tasks.empty()) {
    r.aggregate = total / static_cast<double>(tasks.size());
    r.mean_turns = turns / static_cast<double>(n);
    r.mean_tool_calls = calls / static_cast<double>(n);
  }
  return r;
}

std::filesystem::path persist_report(const MetricsReport& report, const std::filesystem::path& root,
                                     const std::string& dataset_name) {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &tm);
  auto dir = root / dataset_name / (report.config_fingerprint.empty() ? "unknown" : report.config_fingerprint);
  std::filesystem::create_directories(dir);
  auto path = dir / fmt::format("{}{:03d}Z.json", stamp, static_cast<int>(ms));
  std::ofstream out(path, std::ios::binary);
  out << report.to_json().dump(2) << "\n";
  if (!out) throw Error("cannot write " + path.string());
  return path;
}

}  // namespace agentkit::eval
