#include "rewind/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <ostream>
#include <thread>

#include "rewind/error.hpp"
#include "rewind/service/debug_service.hpp"
#include "rewind/session_log.hpp"
#include "rewind/session_manager.hpp"
#include "rewind/team.hpp"

namespace fs = std::filesystem;

namespace timetravel::cli {

fs::path resolve_export_dir(const std::optional<fs::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kExportDirEnv); env && *env) return env;
  return "exports";
}

namespace {

void report_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << '\n';
  if (auto* x = dynamic_cast<const Error*>(&e); x && !x->detail().empty()) err << "  detail: " << x->detail().dump() << '\n';
}

struct Outcome {
  SessionLog log;
  RunResult run;
};

Outcome run_fixture(const TeamSpec& team, std::optional<std::size_t> max_steps) {
  RuntimeOptions ro;
  if (max_steps) ro.max_steps_per_run = *max_steps;
  auto rt = make_runtime(team, ro);
  enqueue_task(*rt, team);
  Outcome o;
  o.run = rt->run();
  SessionManager sessions(*rt);
  if (team.task) sessions.evaluate(rt->active_session(), *team.task);
  o.log = capture_session(*rt, rt->active_session(), team.name, team.file);
  return o;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err, fs::path* exported) {
  TeamSpec team;
  try {
    team = load_team_file(options.team);
    if (!team.task) throw Error(ErrorCode::invalid_argument, "team file has no task fixture");
  } catch (const std::exception& e) {
    report_error(err, e);
    return exit_code::load_error;
  }

  Outcome o;
  try {
    o = run_fixture(team, options.max_steps);
  } catch (const std::exception& e) {
    report_error(err, e);
    return exit_code::load_error;
  }

  const fs::path dir = resolve_export_dir(options.export_dir);
  const fs::path path = dir / (team.name + "." + o.log.session_id + ".json");
  try {
    write_session_log(o.log, path);
  } catch (const std::exception& e) {
    report_error(err, e);
  }
  if (exported) *exported = path;

  const Verdict& v = o.log.verdict;
  out << "team: " << team.name << '\n'
      << "stop: " << to_string(o.run.stop) << " after " << o.run.steps << " steps\n"
      << "messages: " << o.log.envelopes.size() << '\n'
      << "verdict: " << to_string(v.status) << " (expected " << (v.expected ? '"' + *v.expected + '"' : "none")
      << ", actual " << (v.actual ? '"' + *v.actual + '"' : "none") << ")\n"
      << "exported: " << path.string() << '\n';
  switch (v.status) {
    case Verdict::Status::pass:
      return exit_code::pass;
    case Verdict::Status::fail:
      return exit_code::fail;
    default:
      return exit_code::unknown;
  }
}

int cmd_replay(const ReplayOptions& options, std::ostream& out, std::ostream& err) {
  SessionLog log;
  TeamSpec team;
  try {
    log = read_session_log(options.log);
    std::optional<fs::path> team_path = options.team ? options.team : log.team_file;
    if (!team_path) throw Error(ErrorCode::invalid_argument, "log names no team file; pass one explicitly");
    team = load_team_file(*team_path);
  } catch (const std::exception& e) {
    report_error(err, e);
    return exit_code::load_error;
  }

  SessionLog replayed;
  try {
    replayed = replay_session(log, team);
  } catch (const std::exception& e) {
    out << "replay diverged: " << e.what() << '\n';
    return exit_code::fail;
  }
  const HistoryDiff d = diff_histories(log.envelopes, replayed.envelopes);
  if (d.identical) {
    out << "identical: " << log.envelopes.size() << " envelopes\n";
    return exit_code::pass;
  }
  out << "first divergence at seq " << *d.first_divergence << '\n';
  for (const auto& line : d.lines) out << line << '\n';
  return exit_code::fail;
}

int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
  TeamSpec team;
  try {
    team = load_team_file(options.team);
    if (!team.task) throw Error(ErrorCode::invalid_argument, "team file has no task fixture");
  } catch (const std::exception& e) {
    report_error(err, e);
    return exit_code::load_error;
  }
  std::optional<json> reference;
  for (std::size_t i = 0; i < options.runs; ++i) {
    Outcome o;
    try {
      o = run_fixture(team, options.max_steps);
    } catch (const std::exception& e) {
      report_error(err, e);
      return exit_code::fail;
    }
    const json norm = normalized(o.log);
    if (!reference) reference = norm;
    if (norm != *reference) {
      out << "run " << i << " differs from run 0\n";
      return exit_code::fail;
    }
    const HistoryDiff d = diff_histories(o.log.envelopes, replay_session(o.log, team).envelopes);
    if (!d.identical) {
      out << "run " << i << " does not replay; first divergence at seq " << *d.first_divergence << '\n';
      return exit_code::fail;
    }
  }
  out << "deterministic: " << options.runs << " runs identical\n";
  return exit_code::pass;
}

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }
}  // namespace

int cmd_serve(const ServeOptions& options, std::ostream& out, std::ostream& err) {
  std::unique_ptr<service::DebugService> svc;
  try {
    service::ServiceOptions so;
    so.host = options.host;
    so.port = options.port;
    so.runtime.checkpoint_dir = options.checkpoint_dir;
    svc = std::make_unique<service::DebugService>(load_team_file(options.team), so);
    svc->start_background();
  } catch (const std::exception& e) {
    report_error(err, e);
    return exit_code::load_error;
  }
  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  out << "serving " << svc->team().name << " at " << svc->base_url() << "/api/v1" << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  svc->stop();
  out << "stopped\n";
  return exit_code::pass;
}

}  // namespace timetravel::cli
