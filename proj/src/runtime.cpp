#include "rewind/runtime.hpp"

#include <algorithm>

#include "rewind/error.hpp"
#include "rewind/session_manager.hpp"

namespace timetravel {

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::paused: return "paused";
    case RunMode::stepping: return "stepping";
    case RunMode::running: return "running";
  }
  return "paused";
}

std::string_view to_string(RunResult::Stop s) {
  switch (s) {
    case RunResult::Stop::queue_empty: return "queue-empty";
    case RunResult::Stop::paused: return "paused";
    case RunResult::Stop::ceiling_hit: return "ceiling-hit";
    case RunResult::Stop::handler_failed: return "handler-failed";
  }
  return "queue-empty";
}

json to_json(const QueueEntry& q) {
  return json{{"enqueue_order", q.enqueue_order},
              {"sender", q.sender},
              {"recipient", q.recipient},
              {"kind", q.kind},
              {"payload", q.payload},
              {"provenance", to_string(q.provenance)}};
}

namespace {

json queue_json(const std::deque<QueueEntry>& q) {
  json out = json::array();
  for (const auto& e : q) out.push_back(to_json(e));
  return out;
}

json item_json(const EnvelopePtr& e) {
  json j = to_json(*e);
  j["type"] = "envelope";
  return j;
}

json item_json(const ThoughtPtr& t) {
  json j = to_json(*t);
  j["type"] = "thought";
  return j;
}

}  // namespace

Runtime::Runtime(RuntimeOptions options)
    : options_(std::move(options)), checkpoints_(options_.checkpoint_dir) {
  active_ = tree_.create_root();
}

Runtime::~Runtime() = default;

void Runtime::require_paused(std::string_view op) const {
  if (faulted_) throw Error(ErrorCode::faulted, std::string(op) + ": runtime is faulted; restore a checkpoint first");
  if (mode_ != RunMode::paused)
    throw Error(ErrorCode::not_paused, std::string(op) + " requires a paused runtime (mode is " +
                                           std::string(to_string(mode_.load())) + ")");
}

std::string Runtime::register_agent(AgentPtr agent) {
  std::lock_guard control(control_);
  if (mode_ != RunMode::paused) throw Error(ErrorCode::not_paused, "agents can only be registered while paused");
  const std::string& name = agent->name();
  if (name == kBroadcast || name == kUser || name == kSystem)
    throw Error(ErrorCode::invalid_argument, "agent name '" + name + "' is reserved");
  std::unique_lock data(data_);
  for (const auto& a : agents_)
    if (a->name() == name) throw Error(ErrorCode::duplicate, "agent '" + name + "' is already registered");
  agents_.push_back(std::move(agent));
  return name;
}

std::vector<AgentDescriptor> Runtime::team() const {
  std::shared_lock data(data_);
  std::vector<AgentDescriptor> out;
  for (const auto& a : agents_) out.push_back(a->descriptor());
  return out;
}

AgentPtr Runtime::agent(const std::string& name) const {
  std::shared_lock data(data_);
  for (const auto& a : agents_)
    if (a->name() == name) return a;
  return nullptr;
}

std::vector<std::string> Runtime::agent_names() const {
  std::shared_lock data(data_);
  std::vector<std::string> out;
  for (const auto& a : agents_) out.push_back(a->name());
  return out;
}

bool Runtime::valid_endpoint(std::string_view name, bool as_recipient) const {
  if (as_recipient ? name == kBroadcast : name == kSystem) return true;
  if (name == kUser) return true;
  return std::any_of(agents_.begin(), agents_.end(), [&](const AgentPtr& a) { return a->name() == name; });
}

QueueEntry Runtime::enqueue(std::string sender, std::string recipient, std::string kind, json payload,
                            Provenance provenance) {
  std::lock_guard control(control_);
  auto entry = enqueue_locked(std::move(sender), std::move(recipient), std::move(kind), std::move(payload), provenance);
  json q;
  {
    std::shared_lock data(data_);
    q = queue_json(queue_);
  }
  emit(events::queue_changed, json{{"queue", std::move(q)}});
  return entry;
}

QueueEntry Runtime::enqueue_locked(std::string sender, std::string recipient, std::string kind, json payload,
                                   Provenance provenance) {
  std::unique_lock data(data_);
  if (!valid_endpoint(recipient, true))
    throw Error(ErrorCode::unknown_recipient, "unknown recipient '" + recipient + "'", json{{"recipient", recipient}});
  if (!valid_endpoint(sender, false))
    throw Error(ErrorCode::invalid_argument, "unknown sender '" + sender + "'", json{{"sender", sender}});
  if (kind.empty()) throw Error(ErrorCode::invalid_argument, "message kind must not be empty");
  if (!has_body(payload)) throw Error(ErrorCode::invalid_argument, "payload must be an object with a text 'body'");
  if (payload_body(payload).empty() && !options_.empty_body_kinds.count(kind))
    throw Error(ErrorCode::invalid_argument, "kind '" + kind + "' requires a non-empty body");
  QueueEntry entry{enqueue_counter_++, std::move(sender), std::move(recipient), std::move(kind), std::move(payload),
                   provenance};
  queue_.push_back(entry);
  return entry;
}

std::vector<QueueEntry> Runtime::queue() const {
  std::shared_lock data(data_);
  return {queue_.begin(), queue_.end()};
}

void Runtime::clear_queue() {
  std::lock_guard control(control_);
  {
    std::unique_lock data(data_);
    queue_.clear();
  }
  emit(events::queue_changed, json{{"queue", json::array()}});
}

std::string Runtime::next_message_id() { return "m" + std::to_string(++message_counter_); }

std::vector<AgentPtr> Runtime::targets_for(const Envelope& e) const {
  std::vector<AgentPtr> out;
  for (const auto& a : agents_) {
    if (!a->handles(e.kind)) continue;
    if (e.is_broadcast() ? a->name() != e.sender : a->name() == e.recipient) out.push_back(a);
  }
  return out;
}

StepResult Runtime::step() {
  std::lock_guard control(control_);
  {
    std::shared_lock data(data_);
    if (queue_.empty() && !faulted_ && mode_ == RunMode::paused) return StepResult{};
  }
  require_paused("step");
  set_mode(RunMode::stepping);
  try {
    auto r = step_locked();
    set_mode(RunMode::paused);
    return r;
  } catch (...) {
    set_mode(RunMode::paused);
    throw;
  }
}

RunResult Runtime::run(std::optional<std::size_t> max_steps) {
  begin_run();
  return continue_run(max_steps);
}

void Runtime::begin_run() {
  std::lock_guard control(control_);
  require_paused("run");
  pause_requested_ = false;
  set_mode(RunMode::running);
}

RunResult Runtime::continue_run(std::optional<std::size_t> max_steps) {
  const std::size_t ceiling = max_steps.value_or(options_.max_steps_per_run);
  if (mode_ != RunMode::running) throw Error(ErrorCode::conflict, "continue_run requires begin_run");
  RunResult result;
  while (true) {
    std::lock_guard control(control_);
    bool empty;
    {
      std::shared_lock data(data_);
      empty = queue_.empty();
    }
    if (pause_requested_) {
      result.stop = RunResult::Stop::paused;
    } else if (empty) {
      result.stop = RunResult::Stop::queue_empty;
    } else if (result.steps >= ceiling) {
      result.stop = RunResult::Stop::ceiling_hit;
    } else {
      try {
        auto r = step_locked();
        ++result.steps;
        if (r.status != StepResult::Status::handler_failed) continue;
        result.stop = RunResult::Stop::handler_failed;
      } catch (...) {
        pause_requested_ = false;
        set_mode(RunMode::paused);
        throw;
      }
    }
    pause_requested_ = false;
    set_mode(RunMode::paused);
    return result;
  }
}

void Runtime::request_pause() { pause_requested_ = true; }

StepResult Runtime::step_locked() {
  QueueEntry entry;
  std::string session;
  Seq seq = 0;
  {
    std::unique_lock data(data_);
    if (queue_.empty()) return StepResult{};
    entry = std::move(queue_.front());
    queue_.pop_front();
    session = active_;
    seq = tree_.next_seq(session);
  }

  try {
    checkpoints_.snapshot(session, seq, agents_);
  } catch (...) {
    std::unique_lock data(data_);
    queue_.push_front(std::move(entry));
    throw;
  }

  auto env = std::make_shared<Envelope>();
  env->seq = seq;
  env->session_id = session;
  env->sender = std::move(entry.sender);
  env->recipient = std::move(entry.recipient);
  env->kind = std::move(entry.kind);
  env->payload = std::move(entry.payload);
  env->provenance = entry.provenance;
  env->timestamp = Clock::now();
  json queue_after;
  {
    std::unique_lock data(data_);
    env->message_id = next_message_id();
    tree_.append(session, env);
    in_flight_ = env;
    queue_after = queue_json(queue_);
  }
  emit(events::message_appended, json{{"session_id", session}, {"item", item_json(env)}});
  emit(events::queue_changed, json{{"queue", std::move(queue_after)}});

  StepResult result;
  result.status = StepResult::Status::dispatched;
  result.processed = env;

  std::vector<std::pair<std::string, std::string>> failures;
  for (const auto& agent : targets_for(*env)) {
    AgentContext ctx;
    try {
      agent->handle(*env, ctx);
      std::lock_guard<std::shared_mutex> check(data_);
      for (const auto& m : ctx.emitted()) {
        if (!valid_endpoint(m.recipient, true))
          throw Error(ErrorCode::unknown_recipient, "emitted message to unknown recipient '" + m.recipient + "'");
        if (!has_body(m.payload)) throw Error(ErrorCode::invalid_argument, "emitted payload has no text body");
      }
    } catch (const std::exception& ex) {
      failures.emplace_back(agent->name(), ex.what());
      continue;
    } catch (...) {
      failures.emplace_back(agent->name(), "unknown failure");
      continue;
    }
    for (const auto& text : ctx.thoughts()) {
      auto t = std::make_shared<Thought>(Thought{agent->name(), seq, text, session});
      {
        std::unique_lock data(data_);
        tree_.append(session, ThoughtPtr(t));
      }
      result.thoughts.push_back(t);
      emit(events::thought_appended, json{{"session_id", session}, {"item", item_json(ThoughtPtr(t))}});
    }
    if (!ctx.emitted().empty()) {
      for (const auto& m : ctx.emitted())
        result.enqueued.push_back(enqueue_locked(agent->name(), m.recipient, m.kind, m.payload, Provenance::original));
      std::shared_lock data(data_);
      queue_after = queue_json(queue_);
    }
  }
  if (!result.enqueued.empty()) emit(events::queue_changed, json{{"queue", queue_after}});

  {
    std::unique_lock data(data_);
    in_flight_.reset();
  }

  for (const auto& [agent_name, what] : failures) {
    Seq err_seq;
    {
      std::shared_lock data(data_);
      err_seq = tree_.next_seq(session);
    }
    checkpoints_.snapshot(session, err_seq, agents_);
    auto err = std::make_shared<Envelope>();
    err->seq = err_seq;
    err->session_id = session;
    err->sender = std::string(kSystem);
    err->recipient = agent_name;
    err->kind = std::string(kinds::handler_error);
    err->payload = json{{"body", "handler of '" + agent_name + "' failed on seq " + std::to_string(seq) + ": " + what},
                        {"agent", agent_name},
                        {"failed_seq", seq},
                        {"error", what}};
    err->provenance = Provenance::original;
    err->timestamp = Clock::now();
    {
      std::unique_lock data(data_);
      err->message_id = next_message_id();
      tree_.append(session, err);
    }
    result.errors.push_back(err);
    result.status = StepResult::Status::handler_failed;
    emit(events::message_appended, json{{"session_id", session}, {"item", item_json(EnvelopePtr(err))}});
  }

  if (env->kind == kinds::final_answer) evaluate_locked(session);
  return result;
}

void Runtime::evaluate_locked(const std::string& session_id) {
  if (!task_) return;
  Verdict v;
  {
    std::unique_lock data(data_);
    v = judge(task_->expected, final_answer(tree_.lineage(session_id)));
    tree_.set_verdict(session_id, v);
  }
  emit(events::verdict_changed, json{{"session_id", session_id}, {"verdict", to_json(v)}});
}

EnvelopePtr Runtime::in_flight() const {
  std::shared_lock data(data_);
  return in_flight_;
}

std::string Runtime::active_session() const {
  std::shared_lock data(data_);
  return active_;
}

std::vector<HistoryItem> Runtime::history(const std::string& session_id) const {
  std::shared_lock data(data_);
  return tree_.history(session_id);
}

std::vector<EnvelopePtr> Runtime::lineage(const std::string& session_id) const {
  std::shared_lock data(data_);
  return tree_.lineage(session_id);
}

SessionTree Runtime::snapshot_tree() const {
  std::shared_lock data(data_);
  return tree_;
}

void Runtime::restore(const std::string& checkpoint_id) {
  std::lock_guard control(control_);
  if (mode_ != RunMode::paused) throw Error(ErrorCode::not_paused, "restore requires a paused runtime");
  restore_locked(checkpoint_id);
}

void Runtime::restore_locked(const std::string& checkpoint_id) {
  try {
    checkpoints_.restore(checkpoint_id, agents_);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::faulted) {
      faulted_ = true;
      emit(events::runstate_changed, runstate_json());
    }
    throw;
  }
  bool was_faulted = faulted_.exchange(false);
  {
    std::unique_lock data(data_);
    queue_.clear();
  }
  if (was_faulted) emit(events::runstate_changed, runstate_json());
  emit(events::queue_changed, json{{"queue", json::array()}});
}

std::size_t Runtime::gc() {
  std::lock_guard control(control_);
  std::shared_lock data(data_);
  return checkpoints_.gc([&](const Checkpoint& cp) {
    if (!tree_.contains(cp.session_id)) return false;
    const Session& s = tree_.get(cp.session_id);
    if (s.fork_seq && cp.seq < *s.fork_seq) return false;
    return cp.seq < tree_.next_seq(cp.session_id);
  });
}

json Runtime::get_config(const std::string& name) const {
  std::shared_lock data(data_);
  for (const auto& a : agents_)
    if (a->name() == name) return a->config();
  throw Error(ErrorCode::not_found, "unknown agent '" + name + "'");
}

void Runtime::set_config(const std::string& name, const json& patch) {
  std::lock_guard control(control_);
  require_paused("set_config");
  json config;
  {
    std::unique_lock data(data_);
    auto it = std::find_if(agents_.begin(), agents_.end(), [&](const AgentPtr& a) { return a->name() == name; });
    if (it == agents_.end()) throw Error(ErrorCode::not_found, "unknown agent '" + name + "'");
    (*it)->set_config(patch);
    config = (*it)->config();
  }
  emit(events::config_changed, json{{"agent", name}, {"config", std::move(config)}});
}

void Runtime::set_task_fixture(std::optional<TaskFixture> task) {
  std::lock_guard control(control_);
  task_ = std::move(task);
}

void Runtime::subscribe(Observer observer) {
  std::lock_guard control(control_);
  observers_.push_back(std::move(observer));
}

void Runtime::emit(std::string_view type, json payload) {
  RuntimeEvent ev{std::string(type), std::move(payload)};
  for (const auto& obs : observers_) {
    try {
      obs(ev);
    } catch (...) {
    }
  }
}

json Runtime::runstate_json() const {
  std::shared_lock data(data_);
  return json{{"mode", to_string(mode_.load())},
              {"faulted", faulted_.load()},
              {"in_flight", in_flight_ ? to_json(*in_flight_) : json(nullptr)},
              {"queue_length", queue_.size()},
              {"active_session", active_}};
}

void Runtime::set_mode(RunMode m) {
  if (mode_.exchange(m) == m) return;
  emit(events::runstate_changed, runstate_json());
}

}  // namespace timetravel
