#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rewind/agent.hpp"
#include "rewind/runtime.hpp"
#include "rewind/session_tree.hpp"

namespace timetravel {

struct AgentEntry {
  std::string type;
  std::string name;
  json config = json::object();
  std::optional<std::filesystem::path> script;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> root;
  /// llm_adapter only: {"type": "canned", "file": ...} or {"type": "http", "url": ...}
  json backend = json::object();
};

/// A documented steering edit shipped with a scenario.
struct ScenarioEdit {
  std::string type;
  Seq seq = 0;
  std::string body;
};

struct TeamSpec {
  std::string name;
  std::filesystem::path file;
  std::vector<AgentEntry> agents;
  std::optional<TaskFixture> task;
  std::vector<ScenarioEdit> edits;
};

/// Parses and validates a team file. Relative paths resolve against the
/// file's directory and must exist. Malformed JSON throws Error(parse_error)
/// with {"path", "line", "column"} in the detail.
TeamSpec load_team_file(const std::filesystem::path& path);
TeamSpec parse_team(const json& doc, const std::filesystem::path& base_dir, const std::filesystem::path& file = {});

AgentPtr make_agent(const AgentEntry& entry);
/// Registers every agent in file order and installs the task fixture.
void install_team(Runtime& runtime, const TeamSpec& team);
std::unique_ptr<Runtime> make_runtime(const TeamSpec& team, RuntimeOptions options = {});

/// Enqueues the team's task fixture as a user-injected message.
QueueEntry enqueue_task(Runtime& runtime, const TeamSpec& team);

}  // namespace timetravel
