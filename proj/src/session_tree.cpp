#include "rewind/session_tree.hpp"

#include <algorithm>
#include <cctype>

#include "rewind/error.hpp"

namespace timetravel {

std::string_view to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::pass: return "pass";
    case Verdict::Status::fail: return "fail";
    case Verdict::Status::unknown: return "unknown";
  }
  return "unknown";
}

Verdict::Status verdict_status_from_string(std::string_view s) {
  if (s == "pass") return Verdict::Status::pass;
  if (s == "fail") return Verdict::Status::fail;
  if (s == "unknown") return Verdict::Status::unknown;
  throw Error(ErrorCode::invalid_argument, "unknown verdict status '" + std::string(s) + "'");
}

json to_json(const Verdict& v) {
  json j{{"status", to_string(v.status)}, {"expected", nullptr}, {"actual", nullptr}};
  if (v.expected) j["expected"] = *v.expected;
  if (v.actual) j["actual"] = *v.actual;
  return j;
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  v.status = verdict_status_from_string(j.value("status", "unknown"));
  if (j.contains("expected") && j["expected"].is_string()) v.expected = j["expected"].get<std::string>();
  if (j.contains("actual") && j["actual"].is_string()) v.actual = j["actual"].get<std::string>();
  return v;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Verdict judge(std::optional<std::string> expected, std::optional<std::string> actual) {
  Verdict v;
  v.expected = std::move(expected);
  v.actual = std::move(actual);
  if (!v.actual || !v.expected) {
    v.status = Verdict::Status::unknown;
  } else {
    v.status = normalize_answer(*v.actual) == normalize_answer(*v.expected) ? Verdict::Status::pass
                                                                            : Verdict::Status::fail;
  }
  return v;
}

json to_json(const TaskFixture& t) {
  json j{{"question", t.question}, {"sender", t.sender}, {"recipient", t.recipient}, {"kind", t.kind}};
  j["expected"] = t.expected ? json(*t.expected) : json(nullptr);
  return j;
}

TaskFixture task_fixture_from_json(const json& j) {
  TaskFixture t;
  t.question = j.at("question").get<std::string>();
  if (j.contains("expected") && j["expected"].is_string()) t.expected = j["expected"].get<std::string>();
  t.sender = j.value("sender", std::string(kUser));
  t.recipient = j.value("recipient", std::string(kBroadcast));
  t.kind = j.value("kind", std::string(kinds::task));
  return t;
}

const std::string& SessionTree::create_root() {
  std::string id = "s" + std::to_string(next_index_);
  Session s;
  s.id = id;
  s.created_at = Clock::now();
  s.creation_index = next_index_++;
  return sessions_.emplace(id, std::move(s)).first->second.id;
}

const std::string& SessionTree::fork(const std::string& parent_id, Seq fork_seq) {
  const Session& parent = get(parent_id);
  if (fork_seq < 0 || fork_seq >= next_seq(parent.id))
    throw Error(ErrorCode::not_found, "session " + parent_id + " has no message at seq " + std::to_string(fork_seq));
  std::string id = "s" + std::to_string(next_index_);
  Session s;
  s.id = id;
  s.parent_id = parent_id;
  s.fork_seq = fork_seq;
  s.created_at = Clock::now();
  s.creation_index = next_index_++;
  return sessions_.emplace(id, std::move(s)).first->second.id;
}

void SessionTree::remove_leaf(const std::string& id) {
  const Session& s = get(id);
  if (s.is_root()) throw Error(ErrorCode::invalid_argument, "the root session cannot be deleted");
  if (!children(id).empty())
    throw Error(ErrorCode::conflict, "session " + id + " has forks; only leaf sessions can be deleted");
  sessions_.erase(id);
}

const Session& SessionTree::get(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::not_found, "unknown session '" + id + "'");
  return it->second;
}

Session& SessionTree::mutable_get(const std::string& id) { return const_cast<Session&>(get(id)); }

std::vector<const Session*> SessionTree::sessions() const {
  std::vector<const Session*> out;
  out.reserve(sessions_.size());
  for (const auto& [_, s] : sessions_) out.push_back(&s);
  std::sort(out.begin(), out.end(),
            [](const Session* a, const Session* b) { return a->creation_index < b->creation_index; });
  return out;
}

std::vector<std::string> SessionTree::children(const std::string& id) const {
  std::vector<std::string> out;
  for (const Session* s : sessions())
    if (s->parent_id == id) out.push_back(s->id);
  return out;
}

void SessionTree::append(const std::string& id, EnvelopePtr envelope) {
  Session& s = mutable_get(id);
  if (envelope->seq != next_seq(id))
    throw Error(ErrorCode::internal, "out-of-order append to " + id + ": seq " + std::to_string(envelope->seq));
  s.own_messages.push_back(std::move(envelope));
}

void SessionTree::append(const std::string& id, ThoughtPtr thought) {
  mutable_get(id).own_thoughts.push_back(std::move(thought));
}

void SessionTree::set_verdict(const std::string& id, Verdict v) { mutable_get(id).verdict = std::move(v); }

Seq SessionTree::next_seq(const std::string& id) const {
  const Session& s = get(id);
  if (!s.own_messages.empty()) return s.own_messages.back()->seq + 1;
  return s.fork_seq.value_or(0);
}

std::vector<EnvelopePtr> SessionTree::lineage(const std::string& id) const {
  const Session& s = get(id);
  std::vector<EnvelopePtr> out;
  if (!s.is_root()) {
    for (auto& e : lineage(*s.parent_id)) {
      if (e->seq >= *s.fork_seq) break;
      out.push_back(std::move(e));
    }
  }
  out.insert(out.end(), s.own_messages.begin(), s.own_messages.end());
  return out;
}

std::vector<ThoughtPtr> SessionTree::lineage_thoughts(const std::string& id) const {
  const Session& s = get(id);
  std::vector<ThoughtPtr> out;
  if (!s.is_root()) {
    for (auto& t : lineage_thoughts(*s.parent_id))
      if (t->seq_anchor < *s.fork_seq) out.push_back(std::move(t));
  }
  out.insert(out.end(), s.own_thoughts.begin(), s.own_thoughts.end());
  return out;
}

std::vector<HistoryItem> SessionTree::history(const std::string& id) const {
  const Session& s = get(id);
  auto envelopes = lineage(id);
  auto thoughts = lineage_thoughts(id);
  auto inherited = [&](Seq seq) { return s.fork_seq && seq < *s.fork_seq; };

  std::vector<HistoryItem> out;
  out.reserve(envelopes.size() + thoughts.size());
  std::size_t t = 0;
  for (const auto& e : envelopes) {
    while (t < thoughts.size() && thoughts[t]->seq_anchor < e->seq) {
      out.push_back(HistoryItem{thoughts[t], inherited(thoughts[t]->seq_anchor)});
      ++t;
    }
    out.push_back(HistoryItem{e, inherited(e->seq)});
    while (t < thoughts.size() && thoughts[t]->seq_anchor == e->seq) {
      out.push_back(HistoryItem{thoughts[t], inherited(e->seq)});
      ++t;
    }
  }
  for (; t < thoughts.size(); ++t) out.push_back(HistoryItem{thoughts[t], inherited(thoughts[t]->seq_anchor)});
  return out;
}

std::optional<std::string> SessionTree::owner_of(const std::string& id, Seq seq) const {
  const Session& s = get(id);
  if (s.fork_seq && seq < *s.fork_seq) return owner_of(*s.parent_id, seq);
  if (s.own_messages.empty()) return std::nullopt;
  Seq first = s.own_messages.front()->seq;
  if (seq < first || seq > s.own_messages.back()->seq) return std::nullopt;
  return s.id;
}

EnvelopePtr SessionTree::envelope_at(const std::string& id, Seq seq) const {
  auto owner = owner_of(id, seq);
  if (!owner) return nullptr;
  const Session& s = get(*owner);
  Seq first = s.own_messages.front()->seq;
  return s.own_messages[static_cast<std::size_t>(seq - first)];
}

std::vector<std::string> SessionTree::chain(const std::string& id) const {
  std::vector<std::string> out;
  for (const Session* s = &get(id);; s = &get(*s->parent_id)) {
    out.push_back(s->id);
    if (s->is_root()) break;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace timetravel
