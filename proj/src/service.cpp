#include "darklabel/service.hpp"

#include <condition_variable>
#include <cstdio>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

#include <httplib.h>

#include "darklabel/csv.hpp"
#include "darklabel/mock_provider.hpp"
#include "darklabel/openai_provider.hpp"
#include "darklabel/ops.hpp"
#include "darklabel/store.hpp"

namespace fs = std::filesystem;

namespace darklabel {

void ServerConfig::validate() const {
  if (concurrency < 1) throw Error(ErrorCode::InvalidConfig, "concurrency must be at least 1");
  if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidConfig, "port out of range");
  if (provider == ProviderKind::Live) OpenAiConfig::from_env();
  std::error_code ec;
  fs::create_directories(state_dir, ec);
  const auto probe = state_dir / ".write-probe";
  try {
    csv::write_file(probe.string(), "");
  } catch (const Error&) {
    throw Error(ErrorCode::Io, "state directory is not writable", state_dir.string());
  }
  fs::remove(probe, ec);
}

std::shared_ptr<Provider> make_provider(ProviderKind kind, const std::string& lexicon_path) {
  if (kind == ProviderKind::Live) return std::make_shared<OpenAiProvider>(OpenAiConfig::from_env());
  return std::make_shared<MockProvider>(lexicon_path.empty() ? MockLexicon::builtin()
                                                             : MockLexicon::load(lexicon_path));
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownWorkbook:
    case ErrorCode::UnknownTask:
    case ErrorCode::UnknownDataId:
    case ErrorCode::UnknownEvaluation:
    case ErrorCode::UnknownRoute:
      return 404;
    case ErrorCode::AnnotationInFlight:
    case ErrorCode::WorkbookExists:
      return 409;
    case ErrorCode::Transport:
    case ErrorCode::RateLimited:
    case ErrorCode::ProviderError:
    case ErrorCode::RetryExhausted:
    case ErrorCode::UnrecognizedPrompt:
      return 502;
    case ErrorCode::Unauthorized:
      return 401;
    case ErrorCode::Io:
    case ErrorCode::MalformedWorkbook:
    case ErrorCode::UnsupportedVersion:
      return 500;
    default:
      return 400;
  }
}

namespace {

struct Slot {
  std::mutex mu;
  std::condition_variable idle;
  bool running = false;
  ProgressTracker progress;
  std::jthread worker;
};

std::string path_regex(const std::string& tmpl) {
  std::string out = tmpl;
  out = std::regex_replace(out, std::regex(R"(\{id\})"), "([A-Za-z0-9_-]+)");
  out = std::regex_replace(out, std::regex(R"(\{[nk]\})"), "(\\d+)");
  return out;
}

Json query_value(const std::string& v) {
  try {
    auto j = Json::parse(v);
    if (j.is_number() || j.is_boolean()) return j;
  } catch (const Json::exception&) {
  }
  return v;
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message, const std::string& details) {
  send_json(res, status, Json{{"code", code}, {"message", message}, {"details", details}});
}

}  // namespace

struct Service::Impl {
  ServerConfig config;
  std::shared_ptr<Provider> provider;
  WorkbookStore store;
  CostTable costs;
  httplib::Server server;
  std::thread listener;
  std::mutex slots_mu;
  std::map<std::string, std::unique_ptr<Slot>> slots;

  Impl(ServerConfig c, std::shared_ptr<Provider> p)
      : config(std::move(c)),
        provider(p ? std::move(p) : make_provider(config.provider, config.lexicon_path)),
        store(config.state_dir),
        costs(config.cost_table_path.empty() ? CostTable::defaults()
                                             : CostTable::load(config.cost_table_path)) {
    routes();
  }

  Slot& slot(const std::string& id) {
    std::lock_guard lock(slots_mu);
    auto& s = slots[id];
    if (!s) s = std::make_unique<Slot>();
    return *s;
  }

  OpEnv env_for(Slot& s) {
    OpEnv env;
    env.provider = provider;
    env.annotation.costs = costs;
    env.annotation.max_in_flight = config.concurrency;
    env.default_seed = config.seed;
    env.actor = "http";
    env.progress = &s.progress;
    return env;
  }

  void authorize(const httplib::Request& req) const {
    if (config.auth_token.empty()) return;
    if (req.get_header_value("Authorization") != "Bearer " + config.auth_token)
      throw Error(ErrorCode::Unauthorized, "missing or wrong bearer token");
  }

  static Json body_params(const httplib::Request& req, const std::string& csv_key) {
    Json params = Json::object();
    const auto type = req.get_header_value("Content-Type");
    if (!req.body.empty()) {
      if (type.find("text/csv") != std::string::npos) {
        if (csv_key.empty()) throw Error(ErrorCode::BadRequest, "this endpoint takes JSON");
        params[csv_key] = req.body;
      } else {
        try {
          params = Json::parse(req.body);
        } catch (const Json::parse_error& e) {
          throw Error(ErrorCode::BadRequest, "request body is not valid JSON", e.what());
        }
        if (!params.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
      }
    }
    for (const auto& [k, v] : req.params)
      if (!params.contains(k)) params[k] = query_value(v);
    return params;
  }

  template <typename F>
  void guarded(const httplib::Request& req, httplib::Response& res, F&& f) {
    try {
      authorize(req);
      f();
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what(), e.details());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what(), "");
    }
  }

  std::string choose_op(const std::vector<const OpSpec*>& candidates, const Json& params) {
    if (candidates.size() == 1) return candidates.front()->name;
    const auto& first = candidates.front()->name;
    if (first.rfind("sample.", 0) == 0) {
      const auto mode = params.value("mode", std::string());
      if (mode == "random") return "sample.random";
      if (mode == "sequential") return "sample.sequential";
      if (mode == "clear") return "sample.clear";
      if (mode == "pin") return "sample.pin";
      throw Error(ErrorCode::BadRequest, "mode must be random, sequential, clear or pin", mode);
    }
    const auto kind = params.value("kind", std::string("session"));
    if (kind == "session") return "evaluate.session";
    if (kind == "rules") return "evaluate.rules";
    throw Error(ErrorCode::BadRequest, "kind must be session or rules", kind);
  }

  void dispatch(const std::string& op, const std::string& id, const Json& params,
                httplib::Response& res) {
    const auto& spec = op_spec(op);
    const auto dir = store.dir(id);
    auto& s = slot(id);
    if (op == "annotate") return start_annotation_job(id, dir, s, params, res);

    auto env = env_for(s);
    Json out;
    if (spec.method == "GET") {
      out = execute_op(op, dir, params, env);
    } else {
      std::lock_guard lock(s.mu);
      if (spec.mutates && s.running)
        throw Error(ErrorCode::AnnotationInFlight, "the workbook is locked while annotating", id);
      out = execute_op(op, dir, params, env);
    }
    if (op == "tasks.export") {
      res.status = 200;
      res.set_content(out.at("csv").get<std::string>(), "text/csv");
      return;
    }
    send_json(res, op == "workbook.create" ? 201 : 200, out);
  }

  void start_annotation_job(const std::string& id, const WorkbookDir& dir, Slot& s,
                            const Json& params, httplib::Response& res) {
    auto env = env_for(s);
    const auto options = annotation_options(params, env);
    std::unique_lock lock(s.mu);
    if (s.running) throw Error(ErrorCode::AnnotationInFlight, "an annotation task is already running", id);
    auto snapshot = dir.load();
    check_annotation_preconditions(snapshot, *provider, options);
    const auto task_number = snapshot.next_task_number();
    s.running = true;
    s.progress.set_phase(Phase::GeneratingInstructionalPrompt);
    s.worker = std::jthread([this, dir, &s, options, params, snapshot = std::move(snapshot)] {
      try {
        auto outcome = run_annotation(snapshot, *provider, options, &s.progress);
        std::lock_guard commit_lock(s.mu);
        auto wb = dir.load();
        commit_annotation(wb, std::move(outcome));
        dir.save(wb);
        dir.log_action("http", "annotate", params);
        const auto total = s.progress.snapshot().total;
        s.progress.set({Phase::Done, total, total, {}});
      } catch (const Error& e) {
        s.progress.set({Phase::Failed, 0, 0, to_string(e.code())});
      } catch (const std::exception&) {
        s.progress.set({Phase::Failed, 0, 0, "Internal"});
      }
      std::lock_guard done_lock(s.mu);
      s.running = false;
      s.idle.notify_all();
    });
    lock.unlock();
    send_json(res, 202, Json{{"task_number", task_number}, {"status", "started"}});
  }

  void routes() {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, Json{{"status", "ok"}});
    });
    server.Get("/workbooks", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { send_json(res, 200, Json{{"workbooks", store.list()}}); });
    });
    server.Delete(R"(/workbooks/([A-Za-z0-9_-]+))",
                  [this](const httplib::Request& req, httplib::Response& res) {
                    guarded(req, res, [&] {
                      const std::string id = req.matches[1];
                      auto& s = slot(id);
                      std::lock_guard lock(s.mu);
                      if (s.running)
                        throw Error(ErrorCode::AnnotationInFlight, "an annotation task is running", id);
                      store.remove(id);
                      send_json(res, 200, Json{{"deleted", id}});
                    });
                  });

    std::map<std::pair<std::string, std::string>, std::vector<const OpSpec*>> grouped;
    for (const auto& op : op_inventory()) grouped[{op.method, op.path}].push_back(&op);
    for (const auto& [key, specs] : grouped) {
      const auto& [method, tmpl] = key;
      const bool csv_body = specs.front()->name == "dataset.import" ||
                            specs.front()->name == "tasks.validate" ||
                            specs.front()->name.rfind("evaluate.", 0) == 0;
      const std::string csv_key = !csv_body                                    ? ""
                                  : specs.front()->name == "dataset.import" ? "csv"
                                  : specs.front()->name == "tasks.validate" ? "csv"
                                                                            : "gold_csv";
      const bool has_number = tmpl.find("{n}") != std::string::npos;
      const bool has_k = tmpl.find("{k}") != std::string::npos;
      auto handler = [this, specs = specs, csv_key, has_number, has_k](const httplib::Request& req,
                                                                       httplib::Response& res) {
        guarded(req, res, [&] {
          auto params = body_params(req, csv_key);
          std::string id;
          if (req.matches.size() > 1) {
            id = req.matches[1];
          } else {
            id = params.value("id", std::string());
            WorkbookStore::check_id(id);
          }
          if (has_number) params["task_number"] = std::stoll(req.matches[2]);
          if (has_k) params["k"] = std::stoll(req.matches[2]);
          dispatch(choose_op(specs, params), id, params, res);
        });
      };
      const auto pattern = path_regex(tmpl);
      if (method == "GET") server.Get(pattern, handler);
      else if (method == "POST") server.Post(pattern, handler);
      else if (method == "PUT") server.Put(pattern, handler);
      else if (method == "DELETE") server.Delete(pattern, handler);
    }

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 404 && res.body.empty())
        send_error(res, 404, to_string(ErrorCode::UnknownRoute), "no such route",
                   req.method + " " + req.path);
    });
  }

  void join_workers() {
    std::vector<Slot*> all;
    {
      std::lock_guard lock(slots_mu);
      for (auto& [id, s] : slots) all.push_back(s.get());
    }
    for (auto* s : all) {
      std::unique_lock lock(s->mu);
      s->idle.wait(lock, [&] { return !s->running; });
    }
  }
};

Service::Service(ServerConfig config, std::shared_ptr<Provider> provider) {
  config.validate();
  impl_ = std::make_unique<Impl>(std::move(config), std::move(provider));
}

Service::~Service() {
  stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  impl_->join_workers();
}

int Service::start() {
  auto& srv = impl_->server;
  const auto& c = impl_->config;
  int port = c.port;
  if (port == 0) {
    port = srv.bind_to_any_port(c.bind_address);
  } else if (!srv.bind_to_port(c.bind_address, port)) {
    port = -1;
  }
  if (port < 0) throw Error(ErrorCode::Io, "cannot bind", c.bind_address + ":" + std::to_string(c.port));
  impl_->listener = std::thread([&srv] { srv.listen_after_bind(); });
  return port;
}

void Service::run() {
  auto& srv = impl_->server;
  const auto& c = impl_->config;
  srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    std::fprintf(stderr, "%s %s %d\n", req.method.c_str(), req.path.c_str(), res.status);
  });
  std::fprintf(stderr, "darklabel listening on %s:%d (state %s)\n", c.bind_address.c_str(), c.port,
               c.state_dir.string().c_str());
  if (!srv.listen(c.bind_address, c.port))
    throw Error(ErrorCode::Io, "cannot bind", c.bind_address + ":" + std::to_string(c.port));
}

void Service::stop() { impl_->server.stop(); }

void Service::wait_idle() { impl_->join_workers(); }

}  // namespace darklabel
