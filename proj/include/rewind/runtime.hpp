#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "rewind/agent.hpp"
#include "rewind/checkpoint_store.hpp"
#include "rewind/envelope.hpp"
#include "rewind/session_tree.hpp"

namespace timetravel {

class SessionManager;

enum class RunMode { paused, stepping, running };
std::string_view to_string(RunMode m);

/// A message waiting in the queue; it has no seq until it is dispatched.
struct QueueEntry {
  std::uint64_t enqueue_order = 0;
  std::string sender;
  std::string recipient;
  std::string kind;
  json payload;
  Provenance provenance = Provenance::original;
};

json to_json(const QueueEntry& q);

struct StepResult {
  enum class Status { dispatched, empty_queue, handler_failed };

  Status status = Status::empty_queue;
  EnvelopePtr processed;
  /// handler-error envelopes appended after `processed`
  std::vector<EnvelopePtr> errors;
  std::vector<QueueEntry> enqueued;
  std::vector<ThoughtPtr> thoughts;

  bool empty() const { return status == Status::empty_queue; }
};

struct RunResult {
  enum class Stop { queue_empty, paused, ceiling_hit, handler_failed };

  std::size_t steps = 0;
  Stop stop = Stop::queue_empty;
};

std::string_view to_string(RunResult::Stop s);

struct RuntimeEvent {
  std::string type;
  json payload;
};

namespace events {
inline constexpr std::string_view message_appended = "message-appended";
inline constexpr std::string_view thought_appended = "thought-appended";
inline constexpr std::string_view queue_changed = "queue-changed";
inline constexpr std::string_view session_created = "session-created";
inline constexpr std::string_view runstate_changed = "runstate-changed";
inline constexpr std::string_view verdict_changed = "verdict-changed";
inline constexpr std::string_view config_changed = "config-changed";
}  // namespace events

struct RuntimeOptions {
  std::size_t max_steps_per_run = 200;
  std::optional<std::filesystem::path> checkpoint_dir;
  /// kinds that may be enqueued with an empty body
  std::set<std::string> empty_body_kinds;
};

/// Routes messages between registered agents through a FIFO queue and
/// records the authoritative history of the active session.
///
/// Dispatch is serial. Mutating calls are serialized on one control mutex;
/// history, queue and session reads only take a short shared lock and can
/// run while a handler is executing.
class Runtime {
 public:
  explicit Runtime(RuntimeOptions options = {});
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  std::string register_agent(AgentPtr agent);
  std::vector<AgentDescriptor> team() const;
  AgentPtr agent(const std::string& name) const;
  std::vector<std::string> agent_names() const;

  QueueEntry enqueue(std::string sender, std::string recipient, std::string kind, json payload,
                     Provenance provenance = Provenance::user_injected);
  std::vector<QueueEntry> queue() const;
  void clear_queue();

  /// Dispatches the queue head. Requires paused mode.
  StepResult step();
  /// Steps until the queue drains, pause is requested, a handler fails or
  /// the ceiling (default: options().max_steps_per_run) is reached.
  RunResult run(std::optional<std::size_t> max_steps = std::nullopt);
  /// run() split in two: begin_run switches to running mode synchronously so
  /// a pause requested before continue_run starts is not lost.
  void begin_run();
  RunResult continue_run(std::optional<std::size_t> max_steps = std::nullopt);
  /// Takes effect at the next inter-message boundary.
  void request_pause();

  RunMode mode() const { return mode_.load(); }
  bool faulted() const { return faulted_.load(); }
  /// Envelope currently being handled, if any.
  EnvelopePtr in_flight() const;

  std::string active_session() const;
  std::vector<HistoryItem> history(const std::string& session_id) const;
  std::vector<EnvelopePtr> lineage(const std::string& session_id) const;
  /// Copy of the fork tree for read-only derivations.
  SessionTree snapshot_tree() const;

  const CheckpointStore& checkpoints() const { return checkpoints_; }
  /// Restores a checkpoint onto the team and discards the queue.
  void restore(const std::string& checkpoint_id);
  /// Prunes checkpoints that are not on a live session's own suffix.
  std::size_t gc();

  json get_config(const std::string& agent) const;
  void set_config(const std::string& agent, const json& patch);

  void set_task_fixture(std::optional<TaskFixture> task);
  const std::optional<TaskFixture>& task_fixture() const { return task_; }

  using Observer = std::function<void(const RuntimeEvent&)>;
  /// Observers are called synchronously, in commit order, on the control path.
  void subscribe(Observer observer);

  const RuntimeOptions& options() const { return options_; }

  /// {mode, faulted, in_flight, queue_length, active_session}
  json runstate_json() const;

 private:
  friend class SessionManager;

  void require_paused(std::string_view op) const;
  bool valid_endpoint(std::string_view name, bool as_recipient) const;
  StepResult step_locked();
  void restore_locked(const std::string& checkpoint_id);
  QueueEntry enqueue_locked(std::string sender, std::string recipient, std::string kind, json payload,
                            Provenance provenance);
  void evaluate_locked(const std::string& session_id);
  void emit(std::string_view type, json payload);
  void set_mode(RunMode m);
  std::string next_message_id();
  std::vector<AgentPtr> targets_for(const Envelope& e) const;

  RuntimeOptions options_;
  mutable std::mutex control_;
  mutable std::shared_mutex data_;

  std::vector<AgentPtr> agents_;
  std::deque<QueueEntry> queue_;
  std::uint64_t enqueue_counter_ = 0;
  std::uint64_t message_counter_ = 0;

  SessionTree tree_;
  std::string active_;
  CheckpointStore checkpoints_;
  std::optional<TaskFixture> task_;

  std::atomic<RunMode> mode_{RunMode::paused};
  std::atomic<bool> pause_requested_{false};
  std::atomic<bool> faulted_{false};
  EnvelopePtr in_flight_;

  std::vector<Observer> observers_;
};

}  // namespace timetravel
