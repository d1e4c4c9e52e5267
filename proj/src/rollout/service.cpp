// SPDX-License-Identifier: Apache-2.0
#include "agentkit/rollout/service.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

#include "agentkit/config/validate.hpp"
#include "agentkit/config/yaml_io.hpp"

namespace agentkit::rollout {

const char* to_string(SessionState s) {
  switch (s) {
    case SessionState::running: return "running";
    case SessionState::awaiting_user: return "awaiting_user";
    case SessionState::done: return "done";
    case SessionState::failed: return "failed";
  }
  return "failed";
}

// ---- sessions

ServiceSession::ServiceSession(std::string id, std::string request) : id_(std::move(id)), request_(std::move(request)) {}

std::string ServiceSession::ask(const std::string& question) {
  std::unique_lock lock(mu_);
  if (closed_) throw SessionClosed("session " + id_ + " is closed");
  Json e{{"type", "ask_user"}, {"question", question}};
  e["id"] = events_.size() + 1;
  events_.push_back(e);
  pending_question_ = question;
  answer_.reset();
  state_ = SessionState::awaiting_user;
  cv_.notify_all();
  cv_.wait(lock, [&] { return answer_.has_value() || closed_; });
  pending_question_.reset();
  if (!answer_) throw SessionClosed("session " + id_ + " closed while awaiting an answer");
  state_ = SessionState::running;
  auto a = std::move(*answer_);
  answer_.reset();
  cv_.notify_all();
  return a;
}

void ServiceSession::emit(const Json& event) {
  std::lock_guard lock(mu_);
  Json e = event;
  e["id"] = events_.size() + 1;
  if (e.value("type", "") == "config_preview" || e.value("type", "") == "done") config_yaml_ = e.value("yaml", config_yaml_);
  events_.push_back(std::move(e));
  cv_.notify_all();
}

void ServiceSession::answer(const std::string& text) {
  std::lock_guard lock(mu_);
  if (state_ != SessionState::awaiting_user || answer_)
    throw NotAwaitingUser(fmt::format("session {} is {}", id_, to_string(state_)));
  answer_ = text;
  cv_.notify_all();
}

void ServiceSession::finish(SessionState final_state, const std::string& yaml_or_error) {
  std::lock_guard lock(mu_);
  state_ = final_state;
  if (final_state == SessionState::done) config_yaml_ = yaml_or_error;
  else error_ = yaml_or_error;
  cv_.notify_all();
}

void ServiceSession::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

SessionState ServiceSession::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

Json ServiceSession::view() const {
  std::lock_guard lock(mu_);
  Json j{{"session_id", id_}, {"status", to_string(state_)}, {"events", events_.size()}};
  j["pending_question"] = pending_question_ ? Json(*pending_question_) : Json(nullptr);
  if (!config_yaml_.empty()) j["config_yaml"] = config_yaml_;
  if (!error_.empty()) j["error"] = error_;
  return j;
}

std::vector<Json> ServiceSession::events_after(std::size_t after, std::chrono::milliseconds timeout, bool* finished) const {
  std::unique_lock lock(mu_);
  auto terminal = [&] { return state_ == SessionState::done || state_ == SessionState::failed || closed_; };
  cv_.wait_for(lock, timeout, [&] { return events_.size() > after || terminal(); });
  std::vector<Json> out;
  for (std::size_t i = after; i < events_.size(); ++i) out.push_back(events_[i]);
  if (finished) *finished = terminal();
  return out;
}

// ---- service

namespace {

void reply_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  reply_json(res, status, Json{{"error", kind}, {"message", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const JobNotFound& e) {
    reply_error(res, 404, "JobNotFound", e.what());
  } catch (const SessionNotFound& e) {
    reply_error(res, 404, "SessionNotFound", e.what());
  } catch (const JobNotDone& e) {
    reply_error(res, 409, "JobNotDone", e.what());
  } catch (const NotAwaitingUser& e) {
    reply_error(res, 409, "NotAwaitingUser", e.what());
  } catch (const ShuttingDown& e) {
    reply_error(res, 503, "ShuttingDown", e.what());
  } catch (const Json::exception& e) {
    reply_error(res, 400, "BadRequest", e.what());
  } catch (const std::invalid_argument& e) {
    reply_error(res, 400, "BadRequest", e.what());
  } catch (const Error& e) {
    reply_error(res, 400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, "InternalError", e.what());
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sse_frame(const Json& event) {
  return fmt::format("id: {}\nevent: {}\ndata: {}\n\n", event.value("id", 0), event.value("type", "message"), event.dump());
}

}  // namespace

RolloutService::RolloutService(runtime::RuntimeDeps deps, ServiceOptions options)
    : deps_(std::move(deps)), options_(std::move(options)) {
  collector_ = std::make_unique<RolloutCollector>(deps_, options_.collector);
  server_ = std::make_unique<httplib::Server>();
  install_routes();
}

RolloutService::~RolloutService() { stop(); }

std::shared_ptr<ServiceSession> RolloutService::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("no session " + id);
  return it->second;
}

std::string RolloutService::create_session(const std::string& request) {
  if (!options_.library || !options_.sandbox_factory || !deps_.gateway)
    throw Error("meta-agent sessions are not configured on this service");
  if (request.empty()) throw std::invalid_argument("session needs a nonempty request");
  std::lock_guard lock(mu_);
  if (stopping_) throw ShuttingDown("service is stopping");
  auto id = fmt::format("sess_{:06d}", next_session_++);
  auto s = std::make_shared<ServiceSession>(id, request);
  sessions_[id] = s;
  auto lib = options_.library;
  auto gw = deps_.gateway;
  auto sandbox = options_.sandbox_factory();
  auto meta = options_.meta;
  meta.cancel = stop_source_.get_token();
  session_threads_.emplace_back([s, lib, gw, sandbox, meta] {
    try {
      auto [cfg, report] = autogen::run_meta_agent(s, lib, gw, sandbox, meta);
      s->finish(SessionState::done, report.config_yaml);
    } catch (const std::exception& e) {
      s->finish(SessionState::failed, e.what());
    }
    try {
      if (sandbox) sandbox->close();
    } catch (const std::exception& e) {
      spdlog::warn("session sandbox close failed: {}", e.what());
    }
  });
  return id;
}

void RolloutService::install_routes() {
  auto& svr = *server_;

  svr.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { reply_json(res, 200, Json{{"status", "ok"}}); });

  svr.Post("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = Json::parse(req.body);
      std::string yaml;
      std::string ref;
      if (body.contains("config")) {
        yaml = body["config"].get<std::string>();
        ref = "inline";
      } else if (body.contains("config_ref")) {
        ref = body["config_ref"].get<std::string>();
        yaml = read_file(options_.config_root / ref);
      } else {
        throw std::invalid_argument("job needs 'config' or 'config_ref'");
      }
      auto catalog = deps_.catalog ? *deps_.catalog : tools::ToolkitCatalog::builtin();
      auto report = config::validate_config_text(yaml, catalog.snapshot());
      if (!report.valid) {
        reply_json(res, 400, Json{{"error", "InvalidConfig"}, {"findings", report.to_json()["findings"]}});
        return;
      }
      JobSpec spec;
      spec.config = config::parse_config(yaml);
      spec.config_ref = ref;
      for (const auto& t : body.at("tasks")) {
        JobTask jt;
        jt.task_id = t.contains("task_id") ? t["task_id"].get<std::string>() : std::to_string(spec.tasks.size() + 1);
        jt.task = t.at("task").get<std::string>();
        if (t.contains("ground_truth") && !t["ground_truth"].is_null()) jt.ground_truth = t["ground_truth"].get<std::string>();
        spec.tasks.push_back(std::move(jt));
      }
      spec.group_size = body.value("group_size", 5);
      spec.temperature = body.value("temperature", 0.7);
      if (body.contains("mode")) spec.mode = practice::score_mode_from_string(body["mode"].get<std::string>());
      auto id = collector_->submit(std::move(spec));
      reply_json(res, 201, Json{{"job_id", id}});
    });
  });

  svr.Get(R"(/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply_json(res, 200, collector_->status(req.matches[1]).to_json()); });
  });

  svr.Get(R"(/v1/jobs/([^/]+)/trajectories)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::string> task_id;
      if (req.has_param("task_id")) task_id = req.get_param_value("task_id");
      Json out = Json::array();
      for (const auto& t : collector_->trajectories(req.matches[1], task_id))
        out.push_back(Json{{"task_id", t.task_id}, {"index", t.index}, {"trajectory", runtime::to_json(t.trajectory)}});
      reply_json(res, 200, Json{{"job_id", std::string(req.matches[1])}, {"trajectories", out}});
    });
  });

  svr.Post(R"(/v1/jobs/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto est = Estimator::mean_baseline;
      if (!req.body.empty()) {
        auto body = Json::parse(req.body);
        if (body.contains("estimator")) est = estimator_from_string(body["estimator"].get<std::string>());
      }
      auto batch = collector_->export_batch(req.matches[1], est);
      if (req.get_param_value("format") == "jsonl") {
        res.status = 200;
        res.set_content(to_jsonl(batch), "application/x-ndjson");
      } else {
        reply_json(res, 200, to_json(batch));
      }
    });
  });

  svr.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto body = Json::parse(req.body);
      auto id = create_session(body.at("request").get<std::string>());
      reply_json(res, 201, Json{{"session_id", id}});
    });
  });

  svr.Get(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply_json(res, 200, session(req.matches[1])->view()); });
  });

  svr.Post(R"(/v1/sessions/([^/]+)/answer)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = session(req.matches[1]);
      auto body = Json::parse(req.body);
      s->answer(body.at("answer").get<std::string>());
      reply_json(res, 200, Json{{"session_id", s->id()}, {"status", "running"}});
    });
  });

  svr.Get(R"(/v1/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = session(req.matches[1]);
      std::size_t after = 0;
      auto last = req.get_header_value("Last-Event-ID");
      if (last.empty() && req.has_param("last_event_id")) last = req.get_param_value("last_event_id");
      if (!last.empty()) after = std::stoul(last);
      auto cursor = std::make_shared<std::size_t>(after);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [this, s, cursor](std::size_t, httplib::DataSink& sink) {
        bool finished = false;
        auto events = s->events_after(*cursor, std::chrono::milliseconds(200), &finished);
        for (const auto& e : events) {
          auto frame = sse_frame(e);
          if (!sink.write(frame.data(), frame.size())) return false;
          *cursor = e.value("id", *cursor);
        }
        if (finished && events.empty()) {
          sink.done();
          return true;
        }
        if (stopping_) {
          sink.done();
          return true;
        }
        if (events.empty()) {
          static const std::string ping = ": keep-alive\n\n";
          if (!sink.write(ping.data(), ping.size())) return false;
        }
        return true;
      });
    });
  });

  svr.Get(R"(/v1/banks/([^/]+)/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto path = practice::snapshot_path(options_.banks_root, req.matches[1], std::stoi(req.matches[2]));
      if (!std::filesystem::exists(path)) {
        reply_error(res, 404, "BankNotFound", "no snapshot " + path.string());
        return;
      }
      reply_json(res, 200, practice::read_snapshot(path).to_json());
    });
  });
}

int RolloutService::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw BindError(fmt::format("cannot bind {}:{}", host, port));
  return bound;
}

int RolloutService::start(const std::string& host, int port) {
  int bound = bind(host, port);
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  spdlog::info("rollout service listening on {}:{}", host, bound);
  return bound;
}

void RolloutService::serve_forever(const std::string& host, int port) {
  int bound = bind(host, port);
  spdlog::info("rollout service listening on {}:{}", host, bound);
  server_->listen_after_bind();
}

void RolloutService::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopped_) return;
    stopped_ = true;
  }
  stopping_ = true;
  collector_->shutdown();
  stop_source_.request_stop();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, s] : sessions_) s->close();
    threads.swap(session_threads_);
  }
  for (auto& t : threads)
    if (t.joinable()) t.join();
  server_->stop();
  if (listener_.joinable()) listener_.join();
}

}  // namespace agentkit::rollout
