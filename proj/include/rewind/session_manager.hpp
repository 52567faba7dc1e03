#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rewind/runtime.hpp"
#include "rewind/session_tree.hpp"

namespace timetravel {

struct SessionInfo {
  std::string id;
  std::optional<std::string> parent_id;
  std::optional<Seq> fork_seq;
  Verdict verdict;
  std::size_t own_messages = 0;
  bool active = false;
  Clock::time_point created_at{};
};

json to_json(const SessionInfo& s);

/// Replacement for one historical message. Routing fields, when present,
/// must equal the original's; only the payload may change.
struct MessageEdit {
  json payload;
  std::optional<std::string> sender;
  std::optional<std::string> recipient;
  std::optional<std::string> kind;
};

/// Reset and edit-and-reset over the runtime's fork tree. Every reset forks:
/// the checkpoint taken before `seq` is restored, a child session starting at
/// `seq` becomes active, and the target message is queued again.
class SessionManager {
 public:
  explicit SessionManager(Runtime& runtime) : runtime_(runtime) {}

  /// `expected_active`, when given, must match the active session at the
  /// moment the command is applied; otherwise Error(conflict).
  std::string reset_at(const std::string& session_id, Seq seq,
                       const std::optional<std::string>& expected_active = std::nullopt);
  std::string edit_and_reset(const std::string& session_id, Seq seq, const MessageEdit& edit,
                             const std::optional<std::string>& expected_active = std::nullopt);

  void set_active(const std::string& session_id);
  std::vector<SessionInfo> list_sessions() const;
  SessionInfo info(const std::string& session_id) const;

  Verdict evaluate(const std::string& session_id, const TaskFixture& task);
  /// Leaf sessions only; the active session cannot be deleted.
  void remove(const std::string& session_id);

 private:
  std::string fork_locked(const std::string& session_id, Seq seq, const std::optional<MessageEdit>& edit,
                          const std::optional<std::string>& expected_active);

  Runtime& runtime_;
};

/// Last final-answer body in the lineage, if any.
std::optional<std::string> final_answer(const std::vector<EnvelopePtr>& lineage);

}  // namespace timetravel
