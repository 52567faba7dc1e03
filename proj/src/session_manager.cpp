#include "rewind/session_manager.hpp"

#include "rewind/error.hpp"

namespace timetravel {

json to_json(const SessionInfo& s) {
  return json{{"session_id", s.id},
              {"parent_id", s.parent_id ? json(*s.parent_id) : json(nullptr)},
              {"fork_seq", s.fork_seq ? json(*s.fork_seq) : json(nullptr)},
              {"verdict", to_json(s.verdict)},
              {"own_messages", s.own_messages},
              {"active", s.active},
              {"created_at", format_timestamp(s.created_at)}};
}

std::optional<std::string> final_answer(const std::vector<EnvelopePtr>& lineage) {
  for (auto it = lineage.rbegin(); it != lineage.rend(); ++it)
    if ((*it)->kind == kinds::final_answer) return (*it)->body();
  return std::nullopt;
}

namespace {

SessionInfo make_info(const Session& s, const std::string& active) {
  return SessionInfo{s.id, s.parent_id, s.fork_seq, s.verdict, s.own_messages.size(), s.id == active, s.created_at};
}

}  // namespace

std::string SessionManager::reset_at(const std::string& session_id, Seq seq,
                                     const std::optional<std::string>& expected_active) {
  return fork_locked(session_id, seq, std::nullopt, expected_active);
}

std::string SessionManager::edit_and_reset(const std::string& session_id, Seq seq, const MessageEdit& edit,
                                           const std::optional<std::string>& expected_active) {
  return fork_locked(session_id, seq, edit, expected_active);
}

std::string SessionManager::fork_locked(const std::string& session_id, Seq seq,
                                        const std::optional<MessageEdit>& edit,
                                        const std::optional<std::string>& expected_active) {
  Runtime& rt = runtime_;
  std::lock_guard control(rt.control_);
  if (rt.mode_ != RunMode::paused) throw Error(ErrorCode::not_paused, "reset requires a paused runtime");

  EnvelopePtr target;
  std::string checkpoint_id;
  {
    std::shared_lock data(rt.data_);
    if (expected_active && *expected_active != rt.active_)
      throw Error(ErrorCode::conflict, "active session is " + rt.active_ + ", not " + *expected_active,
                  json{{"active_session", rt.active_}, {"expected_session", *expected_active}});
    if (!rt.tree_.contains(session_id)) throw Error(ErrorCode::not_found, "unknown session '" + session_id + "'");
    target = rt.tree_.envelope_at(session_id, seq);
    if (!target)
      throw Error(ErrorCode::not_found, "session " + session_id + " has no message at seq " + std::to_string(seq),
                  json{{"session_id", session_id}, {"seq", seq}});
    auto owner = rt.tree_.owner_of(session_id, seq);
    auto cp = rt.checkpoints_.at(*owner, seq);
    if (!cp)
      throw Error(ErrorCode::not_found, "no checkpoint for seq " + std::to_string(seq) + " in " + *owner,
                  json{{"session_id", *owner}, {"seq", seq}});
    checkpoint_id = cp->checkpoint_id;
  }

  json payload = target->payload;
  Provenance provenance = target->provenance;
  if (edit) {
    json mismatched = json::object();
    if (edit->sender && *edit->sender != target->sender) mismatched["sender"] = target->sender;
    if (edit->recipient && *edit->recipient != target->recipient) mismatched["recipient"] = target->recipient;
    if (edit->kind && *edit->kind != target->kind) mismatched["kind"] = target->kind;
    if (!mismatched.empty())
      throw Error(ErrorCode::edit_locality, "edits may change the payload only", json{{"original", mismatched}});
    if (!has_body(edit->payload) ||
        (payload_body(edit->payload).empty() && !rt.options_.empty_body_kinds.count(target->kind)))
      throw Error(ErrorCode::invalid_argument, "edited payload needs a non-empty text 'body'");
    payload = edit->payload;
    provenance = Provenance::edited;
  }

  rt.restore_locked(checkpoint_id);

  std::string child;
  {
    std::unique_lock data(rt.data_);
    child = rt.tree_.fork(session_id, seq);
    rt.active_ = child;
  }
  SessionInfo info;
  {
    std::shared_lock data(rt.data_);
    info = make_info(rt.tree_.get(child), rt.active_);
  }
  rt.emit(events::session_created, json{{"session", to_json(info)}});
  rt.enqueue_locked(target->sender, target->recipient, target->kind, std::move(payload), provenance);
  json q;
  {
    std::shared_lock data(rt.data_);
    q = json::array();
    for (const auto& e : rt.queue_) q.push_back(to_json(e));
  }
  rt.emit(events::queue_changed, json{{"queue", std::move(q)}});
  rt.emit(events::runstate_changed, rt.runstate_json());
  return child;
}

void SessionManager::set_active(const std::string& session_id) {
  Runtime& rt = runtime_;
  std::lock_guard control(rt.control_);
  if (rt.mode_ != RunMode::paused) throw Error(ErrorCode::not_paused, "set_active requires a paused runtime");
  {
    std::unique_lock data(rt.data_);
    rt.tree_.get(session_id);
    rt.active_ = session_id;
  }
  rt.emit(events::runstate_changed, rt.runstate_json());
}

std::vector<SessionInfo> SessionManager::list_sessions() const {
  std::shared_lock data(runtime_.data_);
  std::vector<SessionInfo> out;
  for (const Session* s : runtime_.tree_.sessions()) out.push_back(make_info(*s, runtime_.active_));
  return out;
}

SessionInfo SessionManager::info(const std::string& session_id) const {
  std::shared_lock data(runtime_.data_);
  return make_info(runtime_.tree_.get(session_id), runtime_.active_);
}

Verdict SessionManager::evaluate(const std::string& session_id, const TaskFixture& task) {
  Runtime& rt = runtime_;
  std::lock_guard control(rt.control_);
  Verdict v;
  {
    std::unique_lock data(rt.data_);
    v = judge(task.expected, final_answer(rt.tree_.lineage(session_id)));
    rt.tree_.set_verdict(session_id, v);
  }
  rt.emit(events::verdict_changed, json{{"session_id", session_id}, {"verdict", to_json(v)}});
  return v;
}

void SessionManager::remove(const std::string& session_id) {
  Runtime& rt = runtime_;
  std::lock_guard control(rt.control_);
  {
    std::unique_lock data(rt.data_);
    if (session_id == rt.active_) throw Error(ErrorCode::conflict, "the active session cannot be deleted");
    rt.tree_.remove_leaf(session_id);
  }
  json state = rt.runstate_json();
  state["removed_session"] = session_id;
  rt.emit(events::runstate_changed, std::move(state));
}

}  // namespace timetravel
