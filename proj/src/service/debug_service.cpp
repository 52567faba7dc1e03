#include "rewind/service/debug_service.hpp"

#include <httplib.h>

#include "rewind/error.hpp"
#include "rewind/session_log.hpp"

namespace timetravel::service {

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::conflict:
    case ErrorCode::not_paused:
    case ErrorCode::empty_queue:
    case ErrorCode::duplicate:
    case ErrorCode::roster_mismatch:
    case ErrorCode::faulted:
      return 409;
    case ErrorCode::checkpoint_failure:
    case ErrorCode::internal:
      return 500;
    default:
      return 400;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                json detail = json::object()) {
  send_json(res, status, json{{"code", code}, {"message", message}, {"detail", std::move(detail)}});
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status_for(e.code()), to_string(e.code()), e.what(), e.detail());
    } catch (const json::exception& e) {
      send_error(res, 400, to_string(ErrorCode::invalid_argument), std::string("malformed request: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, to_string(ErrorCode::internal), e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j;
  try {
    j = json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_argument, std::string("request body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
  return j;
}

std::optional<std::string> opt_string(const json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  if (!body[key].is_string()) throw Error(ErrorCode::invalid_argument, std::string("'") + key + "' must be a string");
  return body[key].get<std::string>();
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    long long n = std::stoll(v, &used);
    if (used != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, std::string("query parameter '") + key + "' must be a non-negative integer");
  }
}

Seq path_seq(const std::string& s) {
  try {
    std::size_t used = 0;
    long long n = std::stoll(s, &used);
    if (used == s.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::invalid_argument, "seq must be an integer");
}

json step_json(const StepResult& r, const Runtime& rt) {
  json errors = json::array(), enqueued = json::array(), thoughts = json::array();
  for (const auto& e : r.errors) errors.push_back(to_json(*e));
  for (const auto& q : r.enqueued) enqueued.push_back(to_json(q));
  for (const auto& t : r.thoughts) thoughts.push_back(to_json(*t));
  const char* status = r.status == StepResult::Status::handler_failed ? "handler-failed" : "dispatched";
  return json{{"status", status},
              {"processed", r.processed ? to_json(*r.processed) : json(nullptr)},
              {"errors", std::move(errors)},
              {"enqueued", std::move(enqueued)},
              {"thoughts", std::move(thoughts)},
              {"runstate", rt.runstate_json()}};
}

}  // namespace

DebugService::DebugService(TeamSpec team, ServiceOptions options)
    : team_(std::move(team)),
      options_(std::move(options)),
      runtime_(make_runtime(team_, options_.runtime)),
      sessions_(*runtime_),
      server_(std::make_unique<httplib::Server>()) {
  runtime_->subscribe([this](const RuntimeEvent& e) { hub_.publish(e.type, e.payload); });
  // Event-stream subscribers each pin a worker thread.
  server_->new_task_queue = [] { return new httplib::ThreadPool(16); };
  install_routes();
}

DebugService::~DebugService() { stop(); }

int DebugService::bind() {
  if (bound_port_ >= 0) return bound_port_;
  if (options_.port == 0) {
    bound_port_ = server_->bind_to_any_port(options_.host);
  } else {
    bound_port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (bound_port_ < 0)
    throw Error(ErrorCode::internal, "cannot bind " + options_.host + ":" + std::to_string(options_.port),
                {{"host", options_.host}, {"port", options_.port}});
  return bound_port_;
}

void DebugService::listen() {
  if (bound_port_ < 0) bind();
  server_->listen_after_bind();
}

int DebugService::start_background() {
  int port = bind();
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void DebugService::stop() {
  if (stopping_.exchange(true)) return;
  runtime_->request_pause();
  join_worker();
  hub_.close_all();
  server_->stop();
  if (listener_.joinable()) listener_.join();
}

std::string DebugService::base_url() const { return "http://" + options_.host + ":" + std::to_string(bound_port_); }

void DebugService::join_worker() {
  std::lock_guard lock(worker_mutex_);
  if (worker_.joinable()) worker_.join();
}

void DebugService::start_run(std::optional<std::size_t> max_steps) {
  std::lock_guard lock(worker_mutex_);
  if (runtime_->mode() != RunMode::paused) throw Error(ErrorCode::not_paused, "a run is already in progress");
  if (runtime_->faulted()) throw Error(ErrorCode::faulted, "runtime is faulted; restore a checkpoint first");
  if (worker_.joinable()) worker_.join();
  runtime_->begin_run();
  worker_ = std::thread([this, max_steps] {
    try {
      runtime_->continue_run(max_steps);
    } catch (const std::exception&) {
      // Failures surface through runstate-changed and handler-error events.
    }
  });
}

void DebugService::install_routes() {
  auto& s = *server_;
  const std::string api = "/api/v1";

  s.Get(api + "/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
          json list = json::array();
          for (const auto& info : sessions_.list_sessions()) list.push_back(to_json(info));
          send_json(res, 200, json{{"active_session", runtime_->active_session()}, {"sessions", std::move(list)}});
        }));

  s.Post(api + R"(/sessions/([^/]+)/activate)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           std::lock_guard w(writer_);
           sessions_.set_active(req.matches[1]);
           send_json(res, 200, to_json(sessions_.info(req.matches[1])));
         }));

  s.Post(api + R"(/sessions/([^/]+)/evaluate)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = body_of(req);
           std::optional<TaskFixture> task = runtime_->task_fixture();
           if (auto expected = opt_string(body, "expected")) {
             if (!task) task = TaskFixture{};
             task->expected = *expected;
           }
           if (!task) throw Error(ErrorCode::invalid_argument, "no task fixture loaded and no 'expected' given");
           std::lock_guard w(writer_);
           Verdict v = sessions_.evaluate(req.matches[1], *task);
           send_json(res, 200, json{{"session_id", req.matches[1].str()}, {"verdict", to_json(v)}});
         }));

  s.Delete(api + R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
             std::lock_guard w(writer_);
             sessions_.remove(req.matches[1]);
             send_json(res, 200, json{{"removed", req.matches[1].str()}});
           }));

  s.Get(api + R"(/sessions/([^/]+)/history)", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const auto items = runtime_->history(req.matches[1]);
          const std::size_t offset = query_size(req, "offset", 0);
          const std::size_t limit = query_size(req, "limit", items.size());
          json out = json::array();
          for (std::size_t i = offset; i < items.size() && i - offset < limit; ++i) out.push_back(to_json(items[i]));
          send_json(res, 200,
                    json{{"session_id", req.matches[1].str()},
                         {"total", items.size()},
                         {"offset", offset},
                         {"limit", limit},
                         {"items", std::move(out)}});
        }));

  s.Get(api + R"(/sessions/([^/]+)/overview)", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const SessionTree tree = runtime_->snapshot_tree();
          tree.get(req.matches[1]);
          const auto dim =
              color_dimension_from_string(req.has_param("dimension") ? req.get_param_value("dimension") : "kind");
          json out = overview_to_json(build_overview(tree), palette_, dim);
          out["session_id"] = req.matches[1].str();
          send_json(res, 200, out);
        }));

  s.Get(api + "/queue", guarded([this](const httplib::Request&, httplib::Response& res) {
          json q = json::array();
          for (const auto& e : runtime_->queue()) q.push_back(to_json(e));
          send_json(res, 200, json{{"queue", std::move(q)}});
        }));

  s.Post(api + "/messages", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = body_of(req);
           const std::string sender = opt_string(body, "sender").value_or(std::string(kUser));
           const auto recipient = opt_string(body, "recipient");
           if (!recipient) throw Error(ErrorCode::invalid_argument, "'recipient' is required");
           const std::string kind = opt_string(body, "kind").value_or(std::string(kinds::task));
           json payload;
           if (body.contains("payload")) payload = body["payload"];
           else if (auto text = opt_string(body, "body")) payload = make_payload(*text);
           else throw Error(ErrorCode::invalid_argument, "'body' or 'payload' is required");
           std::lock_guard w(writer_);
           if (auto expected = opt_string(body, "expected_session"); expected && *expected != runtime_->active_session())
             throw Error(ErrorCode::conflict, "active session is " + runtime_->active_session(),
                         {{"expected", *expected}, {"active", runtime_->active_session()}});
           QueueEntry q = runtime_->enqueue(sender, *recipient, kind, payload, Provenance::user_injected);
           send_json(res, 201, to_json(q));
         }));

  s.Post(api + R"(/messages/(-?\d+)/reset)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = body_of(req);
           const Seq seq = path_seq(req.matches[1]);
           std::lock_guard w(writer_);
           const std::string from = opt_string(body, "session_id").value_or(runtime_->active_session());
           const std::string id = sessions_.reset_at(from, seq, opt_string(body, "expected_session"));
           send_json(res, 201, to_json(sessions_.info(id)));
         }));

  s.Put(api + R"(/messages/(-?\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const json body = body_of(req);
          const Seq seq = path_seq(req.matches[1]);
          std::lock_guard w(writer_);
          const std::string from = opt_string(body, "session_id").value_or(runtime_->active_session());
          MessageEdit edit;
          edit.sender = opt_string(body, "sender");
          edit.recipient = opt_string(body, "recipient");
          edit.kind = opt_string(body, "kind");
          if (body.contains("payload")) {
            edit.payload = body["payload"];
          } else if (auto text = opt_string(body, "body")) {
            const auto lineage = runtime_->lineage(from);
            if (seq < 0 || static_cast<std::size_t>(seq) >= lineage.size())
              throw Error(ErrorCode::not_found, "no message at seq " + std::to_string(seq) + " in " + from);
            edit.payload = lineage[static_cast<std::size_t>(seq)]->payload;
            edit.payload["body"] = *text;
          } else {
            throw Error(ErrorCode::invalid_argument, "'body' or 'payload' is required");
          }
          const std::string id = sessions_.edit_and_reset(from, seq, edit, opt_string(body, "expected_session"));
          send_json(res, 201, to_json(sessions_.info(id)));
        }));

  s.Post(api + "/control/step", guarded([this](const httplib::Request&, httplib::Response& res) {
           std::lock_guard w(writer_);
           StepResult r = runtime_->step();
           if (r.empty()) {
             if (runtime_->mode() != RunMode::paused) throw Error(ErrorCode::not_paused, "a run is in progress");
             throw Error(ErrorCode::empty_queue, "the queue is empty");
           }
           send_json(res, 200, step_json(r, *runtime_));
         }));

  s.Post(api + "/control/run", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = body_of(req);
           std::optional<std::size_t> max_steps;
           if (body.contains("max_steps")) {
             if (!body["max_steps"].is_number_unsigned())
               throw Error(ErrorCode::invalid_argument, "'max_steps' must be a non-negative integer");
             max_steps = body["max_steps"].get<std::size_t>();
           }
           std::lock_guard w(writer_);
           start_run(max_steps);
           send_json(res, 202, runtime_->runstate_json());
         }));

  s.Post(api + "/control/pause", guarded([this](const httplib::Request&, httplib::Response& res) {
           runtime_->request_pause();
           join_worker();
           send_json(res, 200, runtime_->runstate_json());
         }));

  s.Get(api + "/control", guarded([this](const httplib::Request&, httplib::Response& res) {
          send_json(res, 200, runtime_->runstate_json());
        }));

  s.Get(api + "/agents", guarded([this](const httplib::Request&, httplib::Response& res) {
          json list = json::array();
          for (const auto& d : runtime_->team()) {
            json j = to_json(d);
            j["config"] = runtime_->get_config(d.name);
            list.push_back(std::move(j));
          }
          send_json(res, 200, json{{"agents", std::move(list)}});
        }));

  s.Get(api + R"(/agents/([^/]+)/config)", guarded([this](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, json{{"agent", req.matches[1].str()}, {"config", runtime_->get_config(req.matches[1])}});
        }));

  s.Put(api + R"(/agents/([^/]+)/config)", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const json body = body_of(req);
          const json patch = body.contains("config") ? body["config"] : body;
          std::lock_guard w(writer_);
          runtime_->set_config(req.matches[1], patch);
          send_json(res, 200, json{{"agent", req.matches[1].str()}, {"config", runtime_->get_config(req.matches[1])}});
        }));

  s.Get(api + R"(/export/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
          SessionLog log = capture_session(*runtime_, req.matches[1], team_.name, team_.file);
          send_json(res, 200, to_json(log));
        }));

  s.Get(api + "/events", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = hub_.subscribe();
    auto greeted = std::make_shared<bool>(false);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, sub, greeted](std::size_t, httplib::DataSink& sink) {
          if (!*greeted) {
            *greeted = true;
            const std::string hello = ": subscribed\n\n";
            return sink.write(hello.data(), hello.size());
          }
          while (!stopping_ && !sub->closed()) {
            if (!sink.is_writable()) return false;
            if (auto e = sub->next(200)) {
              const std::string frame = sse_frame(*e);
              return sink.write(frame.data(), frame.size());
            }
          }
          sink.done();
          return true;
        },
        [this, sub](bool) { hub_.unsubscribe(sub); });
  });

  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) send_error(res, 404, to_string(ErrorCode::not_found), "no route for " + req.method + " " + req.path);
  });
}

}  // namespace timetravel::service
