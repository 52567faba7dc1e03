#include "rewind/session_log.hpp"

#include <fstream>
#include <sstream>

#include "rewind/error.hpp"
#include "rewind/session_manager.hpp"

namespace fs = std::filesystem;

namespace timetravel {

SessionLog capture_session(const Runtime& runtime, const std::string& session_id, const std::string& team_name,
                           const std::optional<fs::path>& team_file) {
  const SessionTree tree = runtime.snapshot_tree();
  const Session& s = tree.get(session_id);
  SessionLog log;
  log.team = team_name;
  log.team_file = team_file;
  log.session_id = s.id;
  log.parent_id = s.parent_id;
  log.fork_seq = s.fork_seq;
  log.verdict = s.verdict;
  for (const auto& id : tree.chain(session_id)) {
    const Session& c = tree.get(id);
    if (c.is_root()) continue;
    ForkPoint fp{c.id, *c.fork_seq, std::nullopt};
    if (!c.own_messages.empty() && c.own_messages.front()->provenance == Provenance::edited)
      fp.edited_payload = c.own_messages.front()->payload;
    log.forks.push_back(std::move(fp));
  }
  const Seq fork = s.fork_seq.value_or(0);
  for (const auto& e : tree.lineage(session_id)) {
    log.envelopes.push_back(*e);
    log.inherited.push_back(e->seq < fork);
  }
  for (const auto& t : tree.lineage_thoughts(session_id)) log.thoughts.push_back(*t);
  return log;
}

json to_json(const SessionLog& log) {
  json forks = json::array();
  for (const auto& f : log.forks) {
    json j{{"session_id", f.session_id}, {"fork_seq", f.fork_seq}};
    if (f.edited_payload) j["edited_payload"] = *f.edited_payload;
    forks.push_back(std::move(j));
  }
  json envelopes = json::array();
  for (std::size_t i = 0; i < log.envelopes.size(); ++i) {
    json j = to_json(log.envelopes[i]);
    j["inherited"] = i < log.inherited.size() && log.inherited[i];
    envelopes.push_back(std::move(j));
  }
  json thoughts = json::array();
  for (const auto& t : log.thoughts) thoughts.push_back(to_json(t));
  return json{{"format", kSessionLogFormat},
              {"schema_version", log.schema_version},
              {"team", log.team},
              {"team_file", log.team_file ? json(log.team_file->string()) : json(nullptr)},
              {"session_id", log.session_id},
              {"parent_id", log.parent_id ? json(*log.parent_id) : json(nullptr)},
              {"fork_seq", log.fork_seq ? json(*log.fork_seq) : json(nullptr)},
              {"forks", std::move(forks)},
              {"envelopes", std::move(envelopes)},
              {"thoughts", std::move(thoughts)},
              {"verdict", to_json(log.verdict)}};
}

SessionLog session_log_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kSessionLogFormat)
    throw Error(ErrorCode::parse_error, "not a session log (format must be \"" + std::string(kSessionLogFormat) + "\")");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw Error(ErrorCode::parse_error, "session log has no integer schema_version");
  const int version = j["schema_version"].get<int>();
  if (version != kSessionLogVersion)
    throw Error(ErrorCode::version_mismatch, "unsupported session log schema_version " + std::to_string(version),
                {{"supported", kSessionLogVersion}, {"found", version}});
  try {
    SessionLog log;
    log.schema_version = version;
    log.team = j.value("team", "");
    if (j.contains("team_file") && j["team_file"].is_string()) log.team_file = j["team_file"].get<std::string>();
    log.session_id = j.at("session_id").get<std::string>();
    if (j.contains("parent_id") && j["parent_id"].is_string()) log.parent_id = j["parent_id"].get<std::string>();
    if (j.contains("fork_seq") && j["fork_seq"].is_number_integer()) log.fork_seq = j["fork_seq"].get<Seq>();
    for (const auto& f : j.at("forks")) {
      ForkPoint fp{f.at("session_id").get<std::string>(), f.at("fork_seq").get<Seq>(), std::nullopt};
      if (f.contains("edited_payload")) fp.edited_payload = f["edited_payload"];
      log.forks.push_back(std::move(fp));
    }
    for (const auto& e : j.at("envelopes")) {
      log.envelopes.push_back(envelope_from_json(e));
      log.inherited.push_back(e.value("inherited", false));
    }
    for (const auto& t : j.at("thoughts")) log.thoughts.push_back(thought_from_json(t));
    log.verdict = verdict_from_json(j.at("verdict"));
    return log;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed session log: ") + e.what());
  }
}

SessionLog read_session_log(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "session log not found: " + path.string(), {{"path", path.string()}});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what(), {{"path", path.string()}});
  }
  return session_log_from_json(doc);
}

void write_session_log(const SessionLog& log, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::internal, "cannot write session log " + path.string());
  out << to_json(log).dump(2) << '\n';
}

json normalized(const SessionLog& log) {
  json j = to_json(log);
  j.erase("session_id");
  j.erase("parent_id");
  j.erase("team_file");
  for (auto& f : j["forks"]) f.erase("session_id");
  for (auto& e : j["envelopes"]) {
    e.erase("message_id");
    e.erase("session_id");
    e.erase("timestamp");
  }
  for (auto& t : j["thoughts"]) t.erase("session_id");
  return j;
}

HistoryDiff diff_histories(const std::vector<Envelope>& expected, const std::vector<Envelope>& actual) {
  HistoryDiff d;
  const std::size_t n = std::max(expected.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool have_e = i < expected.size(), have_a = i < actual.size();
    if (have_e && have_a) {
      const json ve = routing_view(expected[i]), va = routing_view(actual[i]);
      if (ve == va) continue;
      d.lines.push_back("seq " + std::to_string(i) + ": expected " + ve.dump());
      d.lines.push_back("seq " + std::to_string(i) + ":   actual " + va.dump());
    } else if (have_e) {
      d.lines.push_back("seq " + std::to_string(i) + ": missing in replay " + routing_view(expected[i]).dump());
    } else {
      d.lines.push_back("seq " + std::to_string(i) + ": extra in replay " + routing_view(actual[i]).dump());
    }
    if (!d.first_divergence) d.first_divergence = static_cast<Seq>(i);
    d.identical = false;
  }
  return d;
}

namespace {

// Steps the active session until its lineage holds `count` envelopes or the
// queue runs dry.
void advance_to(Runtime& rt, std::size_t count, std::size_t budget) {
  while (rt.lineage(rt.active_session()).size() < count && budget-- > 0) {
    if (rt.step().empty()) return;
  }
}

}  // namespace

SessionLog replay_session(const SessionLog& log, const TeamSpec& team) {
  auto rt = make_runtime(team);
  SessionManager sessions(*rt);
  if (log.envelopes.empty()) return capture_session(*rt, rt->active_session(), team.name, team.file);

  const Envelope& first = log.envelopes.front();
  rt->enqueue(first.sender, first.recipient, first.kind, first.payload, first.provenance);
  const std::size_t budget = log.envelopes.size() * 4 + 64;
  for (const auto& fork : log.forks) {
    advance_to(*rt, static_cast<std::size_t>(fork.fork_seq) + 1, budget);
    const std::string active = rt->active_session();
    if (fork.edited_payload) {
      MessageEdit edit;
      edit.payload = *fork.edited_payload;
      sessions.edit_and_reset(active, fork.fork_seq, edit);
    } else {
      sessions.reset_at(active, fork.fork_seq);
    }
  }
  advance_to(*rt, log.envelopes.size(), budget);
  return capture_session(*rt, rt->active_session(), team.name, team.file);
}

}  // namespace timetravel
