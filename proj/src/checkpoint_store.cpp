#include "rewind/checkpoint_store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>

#include "rewind/error.hpp"

namespace fs = std::filesystem;

namespace timetravel {

std::string checkpoint_id_for(const std::string& session_id, Seq seq) {
  return "cp:" + session_id + ":" + std::to_string(seq);
}

json to_json(const Checkpoint& cp) {
  json states = json::object();
  for (const auto& [name, doc] : cp.agent_states) states[name] = json::parse(doc);
  return json{{"checkpoint_id", cp.checkpoint_id},
              {"session_id", cp.session_id},
              {"seq", cp.seq},
              {"created_at", format_timestamp(cp.created_at)},
              {"agent_states", std::move(states)}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    Checkpoint cp;
    cp.checkpoint_id = j.at("checkpoint_id").get<std::string>();
    cp.session_id = j.at("session_id").get<std::string>();
    cp.seq = j.at("seq").get<Seq>();
    for (const auto& [name, doc] : j.at("agent_states").items()) cp.agent_states[name] = doc.dump();
    return cp;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::parse_error, std::string("malformed checkpoint: ") + ex.what());
  }
}

CheckpointStore::CheckpointStore(std::optional<fs::path> persist_dir) : persist_dir_(std::move(persist_dir)) {
  if (persist_dir_) fs::create_directories(*persist_dir_);
}

std::string CheckpointStore::snapshot(const std::string& session_id, Seq seq, std::span<const AgentPtr> agents) {
  auto cp = std::make_shared<Checkpoint>();
  cp->checkpoint_id = checkpoint_id_for(session_id, seq);
  cp->session_id = session_id;
  cp->seq = seq;
  cp->created_at = Clock::now();
  for (const auto& agent : agents) {
    try {
      cp->agent_states[agent->name()] = state_document(*agent).dump();
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::checkpoint_failure, "save_state failed for agent '" + agent->name() + "': " + ex.what(),
                  json{{"agent", agent->name()}, {"session_id", session_id}, {"seq", seq}});
    }
  }
  bool inserted;
  {
    std::unique_lock lock(mutex_);
    inserted = by_id_.emplace(cp->checkpoint_id, cp).second;
  }
  // First write wins; a stored checkpoint is never replaced.
  if (inserted && persist_dir_) persist(*cp);
  return cp->checkpoint_id;
}

void CheckpointStore::restore(const std::string& checkpoint_id, std::span<const AgentPtr> agents) const {
  auto cp = find(checkpoint_id);
  if (!cp) throw Error(ErrorCode::not_found, "unknown checkpoint '" + checkpoint_id + "'");

  std::set<std::string> roster;
  for (const auto& a : agents) roster.insert(a->name());
  json missing = json::array();
  json extra = json::array();
  for (const auto& [name, _] : cp->agent_states)
    if (!roster.count(name)) missing.push_back(name);
  for (const auto& name : roster)
    if (!cp->agent_states.count(name)) extra.push_back(name);
  if (!missing.empty() || !extra.empty()) {
    throw Error(ErrorCode::roster_mismatch, "team roster does not match checkpoint " + checkpoint_id,
                json{{"missing", missing}, {"extra", extra}});
  }

  for (const auto& agent : agents) {
    try {
      load_state_document(*agent, json::parse(cp->agent_states.at(agent->name())));
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::faulted, "load_state failed for agent '" + agent->name() + "': " + ex.what(),
                  json{{"agent", agent->name()}, {"checkpoint_id", checkpoint_id}});
    }
  }
}

CheckpointPtr CheckpointStore::find(const std::string& checkpoint_id) const {
  std::shared_lock lock(mutex_);
  auto it = by_id_.find(checkpoint_id);
  return it == by_id_.end() ? nullptr : it->second;
}

CheckpointPtr CheckpointStore::at(const std::string& session_id, Seq seq) const {
  return find(checkpoint_id_for(session_id, seq));
}

std::vector<CheckpointPtr> CheckpointStore::all() const {
  std::shared_lock lock(mutex_);
  std::vector<CheckpointPtr> out;
  out.reserve(by_id_.size());
  for (const auto& [_, cp] : by_id_) out.push_back(cp);
  return out;
}

std::size_t CheckpointStore::size() const {
  std::shared_lock lock(mutex_);
  return by_id_.size();
}

std::size_t CheckpointStore::gc(const std::function<bool(const Checkpoint&)>& reachable) {
  std::unique_lock lock(mutex_);
  std::size_t pruned = 0;
  for (auto it = by_id_.begin(); it != by_id_.end();) {
    if (!reachable(*it->second)) {
      it = by_id_.erase(it);
      ++pruned;
    } else {
      ++it;
    }
  }
  return pruned;
}

void CheckpointStore::persist(const Checkpoint& cp) const {
  auto dir = *persist_dir_ / cp.session_id;
  fs::create_directories(dir);
  auto path = dir / (std::to_string(cp.seq) + ".json");
  std::ofstream out(path, std::ios::trunc);
  out << to_json(cp).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::internal, "cannot write checkpoint file " + path.string());
}

std::vector<Checkpoint> CheckpointStore::read_persisted(const fs::path& dir) {
  std::vector<Checkpoint> out;
  if (!fs::exists(dir)) return out;
  for (const auto& session_dir : fs::directory_iterator(dir)) {
    if (!session_dir.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(session_dir.path())) {
      if (file.path().extension() != ".json") continue;
      std::ifstream in(file.path());
      try {
        out.push_back(checkpoint_from_json(json::parse(in)));
      } catch (const json::exception& ex) {
        throw Error(ErrorCode::parse_error, "malformed checkpoint file " + file.path().string() + ": " + ex.what());
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Checkpoint& a, const Checkpoint& b) {
    return std::tie(a.session_id, a.seq) < std::tie(b.session_id, b.seq);
  });
  return out;
}

}  // namespace timetravel
