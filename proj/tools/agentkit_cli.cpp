// SPDX-License-Identifier: Apache-2.0
// agentkit command line.
#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "agentkit/autogen/meta_agent.hpp"
#include "agentkit/autogen/workflow.hpp"
#include "agentkit/config/validate.hpp"
#include "agentkit/config/yaml_io.hpp"
#include "agentkit/eval/eval.hpp"
#include "agentkit/llm/http_transport.hpp"
#include "agentkit/practice/practice.hpp"
#include "agentkit/rollout/service.hpp"

using namespace agentkit;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  auto p = std::filesystem::path(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

struct ModelFlags {
  std::string replay;
  std::string record;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--replay", f.replay, "Serve model responses from a cassette instead of the network");
  cmd->add_option("--record", f.record, "Append every model exchange to a cassette");
}

std::shared_ptr<llm::Gateway> make_gateway(const ModelFlags& f) {
  const char* model = std::getenv("LLM_MODEL");
  std::shared_ptr<llm::Transport> t;
  if (!f.replay.empty()) {
    t = std::make_shared<llm::ReplayTransport>(std::filesystem::path(f.replay));
  } else {
    t = std::make_shared<llm::HttpTransport>(llm::HttpEndpoint::from_env());
    if (!f.record.empty()) t = std::make_shared<llm::RecordTransport>(t, std::filesystem::path(f.record));
  }
  return std::make_shared<llm::Gateway>(t, model ? model : "default");
}

struct Runtime {
  std::shared_ptr<autogen::ToolLibrary> library;
  std::shared_ptr<tools::ToolkitCatalog> catalog;
};

Runtime load_runtime(const std::string& library_dir) {
  Runtime r;
  r.catalog = std::make_shared<tools::ToolkitCatalog>(tools::ToolkitCatalog::builtin());
  r.library = std::make_shared<autogen::ToolLibrary>(*r.catalog);
  if (!library_dir.empty()) {
    r.library->load(library_dir);
    r.library->install(*r.catalog);
  }
  return r;
}

config::AgentConfig load_config(const std::string& path, const tools::ToolkitCatalog& catalog) {
  const auto text = read_file(path);
  auto report = config::validate_config_text(text, catalog.snapshot());
  if (!report.valid) throw std::runtime_error(fmt::format("{} is not a valid config:\n{}", path, report.to_json().dump(2)));
  return config::parse_config(text);
}

runtime::RuntimeDeps base_deps(const ModelFlags& mf, const Runtime& rt) {
  runtime::RuntimeDeps d;
  d.gateway = make_gateway(mf);
  d.catalog = rt.catalog;
  return d;
}

/// Reads answers for ask_user from stdin.
class ConsoleDialogue : public autogen::DialogueSession {
 public:
  explicit ConsoleDialogue(std::string request) : request_(std::move(request)) {}
  std::string request() const override { return request_; }
  std::string ask(const std::string& question) override {
    std::lock_guard lock(mu_);
    std::cout << "\n? " << question << "\n> " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) throw std::runtime_error("no answer on stdin");
    return line;
  }
  void emit(const Json& event) override {
    std::lock_guard lock(mu_);
    const auto type = event.value("type", "");
    if (type == "assistant_delta") std::cout << event.value("text", "") << "\n";
    else if (type == "tool_event") std::cerr << fmt::format("[{}: {}]\n", event.value("tool", ""), event.value("status", ""));
    else if (type == "config_preview") std::cerr << "[config preview]\n" << event.value("yaml", "");
  }

 private:
  std::string request_;
  std::mutex mu_;
};

rollout::RolloutService* g_service = nullptr;

void on_signal(int) {
  if (g_service) std::thread([] { g_service->stop(); }).detach();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agentkit: configure, run, generate, practice, evaluate and serve agents"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // validate
  auto* validate = app.add_subcommand("validate", "Validate agent configs");
  std::vector<std::string> validate_paths;
  std::string validate_library;
  validate->add_option("configs", validate_paths, "Config files")->required();
  validate->add_option("--library", validate_library, "Tool library directory");

  // emit
  auto* emit = app.add_subcommand("emit", "Print the canonical form of a config");
  std::string emit_path;
  emit->add_option("config", emit_path)->required();

  // run
  auto* run = app.add_subcommand("run", "Run one episode");
  std::string run_cfg, run_task, run_out, run_library;
  std::optional<double> run_temp;
  std::optional<std::int64_t> run_seed;
  ModelFlags run_mf;
  run->add_option("-c,--config", run_cfg)->required();
  run->add_option("task", run_task)->required();
  run->add_option("--out", run_out, "Write the trajectory JSON here");
  run->add_option("--temp", run_temp);
  run->add_option("--seed", run_seed);
  run->add_option("--library", run_library);
  add_model_flags(run, run_mf);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate an agent config");
  gen->require_subcommand(1);
  std::string gen_desc, gen_out, gen_report, gen_library, gen_workdir;
  ModelFlags gen_mf;
  auto* gen_wf = gen->add_subcommand("workflow", "Four-stage pipeline from a task description");
  gen_wf->add_option("description", gen_desc)->required();
  auto* gen_meta = gen->add_subcommand("meta", "Interactive architect agent");
  gen_meta->add_option("request", gen_desc)->required();
  for (auto* c : {gen_wf, gen_meta}) {
    c->add_option("--out", gen_out, "Write the YAML config here");
    c->add_option("--report", gen_report, "Write the generation report JSON here");
    c->add_option("--library", gen_library, "Tool library directory (read and updated)");
    c->add_option("--workdir", gen_workdir, "Sandbox work directory");
    add_model_flags(c, gen_mf);
  }

  // practice
  auto* prac = app.add_subcommand("practice", "Learn an experience bank from a dataset");
  std::string prac_cfg, prac_data, prac_run_id = "run", prac_banks = "banks", prac_out, prac_library, prac_mode;
  int prac_epochs = 3, prac_group = 5;
  double prac_temp = 0.7;
  std::size_t prac_conc = 64;
  ModelFlags prac_mf;
  prac->add_option("-c,--config", prac_cfg)->required();
  prac->add_option("-d,--data", prac_data)->required();
  prac->add_option("--epochs", prac_epochs);
  prac->add_option("--group-size", prac_group);
  prac->add_option("--temp", prac_temp);
  prac->add_option("--concurrency", prac_conc);
  prac->add_option("--run-id", prac_run_id);
  prac->add_option("--banks-dir", prac_banks);
  prac->add_option("--mode", prac_mode, "ground_truth or self_consistency");
  prac->add_option("--out", prac_out, "Write the practice report JSON here");
  prac->add_option("--library", prac_library);
  add_model_flags(prac, prac_mf);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a config on a dataset");
  std::string ev_cfg, ev_data, ev_metric = "pass_at_1", ev_out = "results", ev_bank, ev_library;
  int ev_k = 1;
  std::size_t ev_conc = 8;
  std::optional<double> ev_temp;
  ModelFlags ev_mf;
  ev->add_option("-c,--config", ev_cfg)->required();
  ev->add_option("-d,--data", ev_data)->required();
  ev->add_option("--metric", ev_metric);
  ev->add_option("-k", ev_k);
  ev->add_option("--concurrency", ev_conc);
  ev->add_option("--out", ev_out, "Results root directory");
  ev->add_option("--bank", ev_bank, "Experience bank snapshot to inject");
  ev->add_option("--temp", ev_temp);
  ev->add_option("--library", ev_library);
  add_model_flags(ev, ev_mf);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the rollout service");
  std::string serve_host = "0.0.0.0", serve_store = "jobs", serve_banks = "banks", serve_library, serve_configs = ".";
  int serve_port = 8080;
  std::size_t serve_pool = 64;
  ModelFlags serve_mf;
  serve->add_option("--host", serve_host);
  serve->add_option("--port", serve_port);
  serve->add_option("--pool", serve_pool);
  serve->add_option("--store", serve_store, "Append-only job store directory");
  serve->add_option("--banks-dir", serve_banks);
  serve->add_option("--configs", serve_configs, "Base directory for config_ref");
  serve->add_option("--library", serve_library);
  add_model_flags(serve, serve_mf);

  // toolkits
  auto* list = app.add_subcommand("toolkits", "List available toolkits and tools");
  std::string list_library;
  list->add_option("--library", list_library);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("agentkit"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    if (*validate) {
      auto rt = load_runtime(validate_library);
      bool all = true;
      for (const auto& p : validate_paths) {
        auto report = config::validate_config_text(read_file(p), rt.catalog->snapshot());
        auto j = report.to_json();
        j["file"] = p;
        std::cout << j.dump() << "\n";
        all = all && report.valid;
      }
      return all ? 0 : 1;
    }
    if (*emit) {
      std::cout << config::emit_config(config::parse_config(read_file(emit_path)));
      return 0;
    }
    if (*run) {
      auto rt = load_runtime(run_library);
      auto cfg = load_config(run_cfg, *rt.catalog);
      auto deps = base_deps(run_mf, rt);
      deps.temperature = run_temp;
      deps.seed = run_seed;
      auto traj = runtime::run_episode(cfg, run_task, deps);
      if (!run_out.empty()) write_file(run_out, runtime::to_json(traj).dump(2) + "\n");
      if (traj.final_answer) std::cout << *traj.final_answer << "\n";
      if (traj.termination != runtime::Termination::answered) {
        std::cerr << "episode ended with " << runtime::to_string(traj.termination)
                  << (traj.error.empty() ? "" : ": " + traj.error) << "\n";
        return 2;
      }
      return 0;
    }
    if (*gen) {
      auto rt = load_runtime(gen_library);
      auto gw = make_gateway(gen_mf);
      env::EnvOptions eo;
      if (!gen_workdir.empty()) eo.workdir = gen_workdir;
      eo.max_timeout_s = 60;
      std::shared_ptr<env::Environment> sandbox = env::create_env(config::EnvSpec{"sandbox", Json::object()}, eo);
      std::pair<config::AgentConfig, autogen::GenerationReport> out;
      if (*gen_wf) {
        out = autogen::generate_workflow(gen_desc, *rt.library, *gw, *sandbox);
      } else {
        auto session = std::make_shared<ConsoleDialogue>(gen_desc);
        out = autogen::run_meta_agent(session, rt.library, gw, sandbox);
      }
      sandbox->close();
      if (!gen_library.empty()) rt.library->save(gen_library);
      if (!gen_report.empty()) write_file(gen_report, out.second.to_json().dump(2) + "\n");
      if (gen_out.empty()) std::cout << out.second.config_yaml;
      else write_file(gen_out, out.second.config_yaml);
      return 0;
    }
    if (*prac) {
      auto rt = load_runtime(prac_library);
      auto cfg = load_config(prac_cfg, *rt.catalog);
      auto deps = base_deps(prac_mf, rt);
      practice::PracticeOptions po;
      po.epochs = prac_epochs;
      po.group.group_size = prac_group;
      po.group.temperature = prac_temp;
      po.group.concurrency = prac_conc;
      po.run_id = prac_run_id;
      po.banks_root = prac_banks;
      if (!prac_mode.empty()) po.mode = practice::score_mode_from_string(prac_mode);
      auto [bank, report] = practice::practice_run(cfg, eval::load_dataset(prac_data), po, deps);
      for (const auto& e : report.epochs)
        std::cout << fmt::format("epoch {}: mean_reward={:.4f} mean_tool_calls={:.3f} bank={} edits={}/{}\n", e.epoch,
                                 e.mean_reward, e.mean_tool_calls, e.bank_size, e.edits_applied,
                                 e.edits_applied + e.edits_rejected);
      if (!prac_out.empty()) write_file(prac_out, report.to_json().dump(2) + "\n");
      return 0;
    }
    if (*ev) {
      auto rt = load_runtime(ev_library);
      auto cfg = load_config(ev_cfg, *rt.catalog);
      auto deps = base_deps(ev_mf, rt);
      eval::EvalOptions eo;
      eo.metric = eval::metric_from_string(ev_metric);
      eo.k = ev_k;
      eo.concurrency = ev_conc;
      auto tasks = eval::load_dataset(ev_data);
      eval::MetricsReport report;
      if (!ev_bank.empty()) {
        report = practice::test_with_bank(cfg, practice::read_snapshot(ev_bank), tasks, ev_temp.value_or(0.3), eo, deps);
      } else {
        deps.temperature = ev_temp;
        report = eval::evaluate(cfg, tasks, eo, deps);
      }
      auto path = eval::persist_report(report, ev_out, std::filesystem::path(ev_data).stem().string());
      std::cout << fmt::format("{} = {:.4f} over {} tasks ({} failed episodes); written to {}\n",
                               eval::to_string(report.metric) == std::string("pass_at_1") ? "pass@1" : fmt::format("mean@{}", report.k),
                               report.aggregate, report.per_task.size(), report.failures, path.string());
      return 0;
    }
    if (*serve) {
      auto rt = load_runtime(serve_library);
      auto deps = base_deps(serve_mf, rt);
      rollout::ServiceOptions so;
      so.collector.pool = serve_pool;
      so.collector.store_dir = serve_store;
      so.banks_root = serve_banks;
      so.config_root = serve_configs;
      so.library = rt.library;
      so.sandbox_factory = [] {
        return std::shared_ptr<env::Environment>(env::create_env(config::EnvSpec{"sandbox", Json::object()}));
      };
      rollout::RolloutService svc(deps, so);
      g_service = &svc;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << fmt::format("serving on {}:{} with pool {}\n", serve_host, serve_port, serve_pool) << std::flush;
      svc.serve_forever(serve_host, serve_port);
      svc.stop();
      g_service = nullptr;
      return 0;
    }
    if (*list) {
      auto rt = load_runtime(list_library);
      for (const auto& e : rt.library->entries()) {
        std::cout << e.qualified() << "  " << e.description;
        if (e.synthesized) std::cout << "  [synthesized]";
        std::cout << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
