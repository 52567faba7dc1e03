#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rewind/envelope.hpp"
#include "rewind/runtime.hpp"
#include "rewind/session_tree.hpp"
#include "rewind/team.hpp"

namespace timetravel {

inline constexpr int kSessionLogVersion = 1;
inline constexpr std::string_view kSessionLogFormat = "rewind.session-log";

struct ForkPoint {
  std::string session_id;
  Seq fork_seq = 0;
  /// payload of the edited message; absent for a plain reset
  std::optional<json> edited_payload;
};

/// Self-contained export of one session's full lineage.
struct SessionLog {
  int schema_version = kSessionLogVersion;
  std::string team;
  std::optional<std::filesystem::path> team_file;
  std::string session_id;
  std::optional<std::string> parent_id;
  std::optional<Seq> fork_seq;
  /// fork points from the root down to this session
  std::vector<ForkPoint> forks;
  std::vector<Envelope> envelopes;
  std::vector<Thought> thoughts;
  /// inherited flags, parallel to `envelopes`
  std::vector<bool> inherited;
  Verdict verdict;
};

SessionLog capture_session(const Runtime& runtime, const std::string& session_id, const std::string& team_name = {},
                           const std::optional<std::filesystem::path>& team_file = std::nullopt);
json to_json(const SessionLog& log);
/// Throws Error(parse_error) for structural problems and
/// Error(version_mismatch) for an unsupported schema_version.
SessionLog session_log_from_json(const json& j);
SessionLog read_session_log(const std::filesystem::path& path);
void write_session_log(const SessionLog& log, const std::filesystem::path& path);

/// Same log with message ids, session ids and timestamps removed.
json normalized(const SessionLog& log);

struct HistoryDiff {
  bool identical = true;
  std::optional<Seq> first_divergence;
  std::vector<std::string> lines;
};

/// Envelope-by-envelope comparison of routing views (ids and timestamps ignored).
HistoryDiff diff_histories(const std::vector<Envelope>& expected, const std::vector<Envelope>& actual);

/// Rebuilds the team, re-drives the initial task and every logged fork
/// (plain reset or edit at the fork seq) and returns the replayed session.
SessionLog replay_session(const SessionLog& log, const TeamSpec& team);

}  // namespace timetravel
