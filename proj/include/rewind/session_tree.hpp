#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rewind/envelope.hpp"

namespace timetravel {

struct Verdict {
  enum class Status { pass, fail, unknown };

  Status status = Status::unknown;
  std::optional<std::string> expected;
  std::optional<std::string> actual;

  bool operator==(const Verdict&) const = default;
};

std::string_view to_string(Verdict::Status s);
Verdict::Status verdict_status_from_string(std::string_view s);
json to_json(const Verdict& v);
Verdict verdict_from_json(const json& j);

/// Trim, ASCII case-fold, collapse internal whitespace runs to one space.
std::string normalize_answer(std::string_view text);
/// Order-sensitive exact comparison after normalization.
Verdict judge(std::optional<std::string> expected, std::optional<std::string> actual);

/// A benchmark question with its expected answer.
struct TaskFixture {
  std::string question;
  std::optional<std::string> expected;
  std::string sender = std::string(kUser);
  std::string recipient = std::string(kBroadcast);
  std::string kind = std::string(kinds::task);
};

json to_json(const TaskFixture& t);
TaskFixture task_fixture_from_json(const json& j);

struct Session {
  std::string id;
  std::optional<std::string> parent_id;
  std::optional<Seq> fork_seq;
  std::vector<EnvelopePtr> own_messages;
  std::vector<ThoughtPtr> own_thoughts;
  Verdict verdict;
  Clock::time_point created_at{};
  std::size_t creation_index = 0;

  bool is_root() const { return !parent_id.has_value(); }
};

/// The conversation fork tree. Plain data: callers provide synchronization.
class SessionTree {
 public:
  const std::string& create_root();
  const std::string& fork(const std::string& parent_id, Seq fork_seq);
  void remove_leaf(const std::string& id);

  bool contains(const std::string& id) const { return sessions_.count(id) != 0; }
  const Session& get(const std::string& id) const;
  /// Creation order, which is also topological (parents precede children).
  std::vector<const Session*> sessions() const;
  std::vector<std::string> children(const std::string& id) const;

  void append(const std::string& id, EnvelopePtr envelope);
  void append(const std::string& id, ThoughtPtr thought);
  void set_verdict(const std::string& id, Verdict v);

  Seq next_seq(const std::string& id) const;
  std::vector<EnvelopePtr> lineage(const std::string& id) const;
  std::vector<ThoughtPtr> lineage_thoughts(const std::string& id) const;
  /// Envelopes and thoughts by seq; thoughts follow the envelope they were
  /// emitted under. Items before the session's fork point are flagged inherited.
  std::vector<HistoryItem> history(const std::string& id) const;
  EnvelopePtr envelope_at(const std::string& id, Seq seq) const;
  /// Session whose own suffix holds `seq` in the lineage of `id`.
  std::optional<std::string> owner_of(const std::string& id, Seq seq) const;
  /// Ancestors root-first, ending with `id` itself.
  std::vector<std::string> chain(const std::string& id) const;

 private:
  Session& mutable_get(const std::string& id);

  std::map<std::string, Session> sessions_;
  std::size_t next_index_ = 0;
};

}  // namespace timetravel
