#include "rewind/team.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "rewind/agents/executor.hpp"
#include "rewind/agents/file_surfer.hpp"
#include "rewind/agents/llm_adapter.hpp"
#include "rewind/agents/scripted_agent.hpp"
#include "rewind/agents/web_surfer.hpp"
#include "rewind/error.hpp"

namespace fs = std::filesystem;

namespace timetravel {

namespace {

const std::set<std::string> kAgentTypes{"orchestrator", "coder", "web_surfer", "file_surfer", "executor", "llm_adapter"};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] void bad(const fs::path& file, const std::string& what, json detail = json::object()) {
  detail["path"] = file.string();
  throw Error(ErrorCode::invalid_argument, "team file " + file.string() + ": " + what, std::move(detail));
}

fs::path resolve_existing(const json& a, const char* key, const fs::path& base, const fs::path& file, bool directory) {
  if (!a.contains(key) || !a[key].is_string()) bad(file, "agent '" + a.value("name", "?") + "' needs a string '" + key + "'");
  fs::path p = a[key].get<std::string>();
  if (p.is_relative()) p = base / p;
  p = p.lexically_normal();
  if (directory ? !fs::is_directory(p) : !fs::is_regular_file(p))
    bad(file, std::string(key) + " not found: " + p.string(), {{"field", key}, {"resolved", p.string()}});
  return p;
}

}  // namespace

TeamSpec parse_team(const json& doc, const fs::path& base_dir, const fs::path& file) {
  if (!doc.is_object()) bad(file, "top level must be an object");
  TeamSpec spec;
  spec.file = file;
  spec.name = doc.value("team", file.stem().string());
  if (!doc.contains("agents") || !doc["agents"].is_array() || doc["agents"].empty())
    bad(file, "'agents' must be a non-empty array");

  std::set<std::string> names;
  for (const auto& a : doc["agents"]) {
    if (!a.is_object()) bad(file, "agent entries must be objects");
    AgentEntry e;
    e.type = a.value("type", "");
    e.name = a.value("name", "");
    if (!kAgentTypes.count(e.type)) bad(file, "unknown agent type '" + e.type + "'", {{"agent", e.name}});
    if (e.name.empty()) bad(file, "agent of type " + e.type + " has no name");
    if (e.name == kUser || e.name == kSystem || e.name == kBroadcast) bad(file, "reserved agent name '" + e.name + "'");
    if (!names.insert(e.name).second) bad(file, "duplicate agent name '" + e.name + "'");
    if (a.contains("config")) {
      if (!a["config"].is_object()) bad(file, "config of '" + e.name + "' must be an object");
      e.config = a["config"];
    }
    if (e.type == "orchestrator" || e.type == "coder" || e.type == "web_surfer")
      e.script = resolve_existing(a, "script", base_dir, file, false);
    if (e.type == "web_surfer") e.corpus = resolve_existing(a, "corpus", base_dir, file, true);
    if (e.type == "file_surfer") e.root = resolve_existing(a, "root", base_dir, file, true);
    if (e.type == "llm_adapter") {
      e.backend = a.value("backend", json{{"type", "canned"}});
      const std::string kind = e.backend.value("type", "canned");
      if (kind == "canned") {
        if (e.backend.contains("file")) e.backend["file"] = resolve_existing(e.backend, "file", base_dir, file, false).string();
      } else if (kind == "http") {
        if (!e.backend.contains("url") || !e.backend["url"].is_string()) bad(file, "http backend needs a 'url'");
      } else {
        bad(file, "unknown backend type '" + kind + "'");
      }
    }
    spec.agents.push_back(std::move(e));
  }

  if (doc.contains("task") && !doc["task"].is_null()) {
    try {
      spec.task = task_fixture_from_json(doc["task"]);
    } catch (const json::exception& ex) {
      bad(file, std::string("malformed task: ") + ex.what());
    }
  }
  for (const auto& ed : doc.value("edits", json::array())) {
    if (!ed.is_object() || !ed.contains("seq") || !ed["seq"].is_number_integer() || !ed.contains("body"))
      bad(file, "edits need an integer 'seq' and a 'body'");
    spec.edits.push_back({ed.value("type", "edit"), ed["seq"].get<Seq>(), ed["body"].get<std::string>()});
  }
  return spec;
}

TeamSpec load_team_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "team file not found: " + path.string(), {{"path", path.string()}});
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte);
    throw Error(ErrorCode::parse_error,
                path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON",
                {{"path", path.string()}, {"line", line}, {"column", col}, {"reason", e.what()}});
  }
  fs::path abs = fs::absolute(path).lexically_normal();
  return parse_team(doc, abs.parent_path(), abs);
}

AgentPtr make_agent(const AgentEntry& e) {
  using namespace agents;
  AgentPtr agent;
  if (e.type == "orchestrator") {
    agent = std::make_shared<ScriptedAgent>(orchestrator_descriptor(e.name), *e.script, true);
  } else if (e.type == "coder") {
    agent = std::make_shared<ScriptedAgent>(coder_descriptor(e.name), *e.script, false);
  } else if (e.type == "web_surfer") {
    agent = std::make_shared<WebSurferAgent>(web_surfer_descriptor(e.name), *e.script, *e.corpus);
  } else if (e.type == "file_surfer") {
    agent = std::make_shared<FileSurferAgent>(file_surfer_descriptor(e.name), *e.root);
  } else if (e.type == "executor") {
    agent = std::make_shared<ExecutorAgent>(executor_descriptor(e.name));
  } else if (e.type == "llm_adapter") {
    std::shared_ptr<CompletionBackend> backend;
    if (e.backend.value("type", "canned") == "http") {
      std::optional<std::string> key;
      if (auto env = e.backend.value("api_key_env", ""); !env.empty()) {
        if (const char* v = std::getenv(env.c_str())) key = v;
      }
      backend = std::make_shared<HttpCompletionBackend>(e.backend["url"].get<std::string>(),
                                                        e.backend.value("path", "/v1/chat/completions"), key);
    } else if (e.backend.contains("file")) {
      backend = CannedBackend::from_file(e.backend["file"].get<std::string>());
    } else {
      backend = std::make_shared<CannedBackend>();
    }
    return std::make_shared<LlmAdapterAgent>(llm_adapter_descriptor(e.name), std::move(backend), e.config);
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown agent type '" + e.type + "'");
  }
  if (!e.config.empty()) agent->set_config(e.config);
  return agent;
}

void install_team(Runtime& runtime, const TeamSpec& team) {
  for (const auto& e : team.agents) runtime.register_agent(make_agent(e));
  runtime.set_task_fixture(team.task);
}

std::unique_ptr<Runtime> make_runtime(const TeamSpec& team, RuntimeOptions options) {
  auto rt = std::make_unique<Runtime>(std::move(options));
  install_team(*rt, team);
  return rt;
}

QueueEntry enqueue_task(Runtime& runtime, const TeamSpec& team) {
  if (!team.task) throw Error(ErrorCode::invalid_argument, "team '" + team.name + "' has no task fixture");
  const auto& t = *team.task;
  return runtime.enqueue(t.sender, t.recipient, t.kind, make_payload(t.question), Provenance::user_injected);
}

}  // namespace timetravel
