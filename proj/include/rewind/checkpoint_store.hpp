#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "rewind/agent.hpp"
#include "rewind/envelope.hpp"

namespace timetravel {

struct Checkpoint {
  std::string checkpoint_id;
  std::string session_id;
  Seq seq = 0;
  /// agent name -> serialized state document (compact JSON text)
  std::map<std::string, std::string> agent_states;
  Clock::time_point created_at{};
};

using CheckpointPtr = std::shared_ptr<const Checkpoint>;

json to_json(const Checkpoint& cp);
Checkpoint checkpoint_from_json(const json& j);

std::string checkpoint_id_for(const std::string& session_id, Seq seq);

/// Team-state snapshots keyed by (session, seq), taken right before the
/// envelope at that seq is dispatched. A checkpoint is stored once; children
/// reach their inherited prefix through the parent's keys.
///
/// When a persistence directory is given every snapshot is also written to
/// `{dir}/{session}/{seq}.json` (append-only).
class CheckpointStore {
 public:
  explicit CheckpointStore(std::optional<std::filesystem::path> persist_dir = std::nullopt);

  /// Calls save_state on every agent. Throws Error(checkpoint_failure)
  /// naming the agent if any of them fails; nothing is stored then.
  std::string snapshot(const std::string& session_id, Seq seq, std::span<const AgentPtr> agents);

  /// Loads every agent's stored document. Roster mismatch throws
  /// Error(roster_mismatch) before any agent is touched; a load_state failure
  /// throws Error(faulted) and leaves the team partially restored.
  void restore(const std::string& checkpoint_id, std::span<const AgentPtr> agents) const;

  CheckpointPtr find(const std::string& checkpoint_id) const;
  CheckpointPtr at(const std::string& session_id, Seq seq) const;
  std::vector<CheckpointPtr> all() const;
  std::size_t size() const;

  /// Deletes every checkpoint for which `reachable` returns false.
  std::size_t gc(const std::function<bool(const Checkpoint&)>& reachable);

  const std::optional<std::filesystem::path>& persist_dir() const { return persist_dir_; }

  /// Reads back every checkpoint file under a persistence directory.
  static std::vector<Checkpoint> read_persisted(const std::filesystem::path& dir);

 private:
  void persist(const Checkpoint& cp) const;

  std::optional<std::filesystem::path> persist_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, CheckpointPtr> by_id_;
};

}  // namespace timetravel
