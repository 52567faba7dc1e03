#include <iostream>

#include <CLI11.hpp>

#include "rewind/cli.hpp"

using namespace timetravel;

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent runtime with checkpoint, fork and replay"};
  app.require_subcommand(1);

  cli::ServeOptions serve;
  std::string serve_team;
  auto* s = app.add_subcommand("serve", "Start the debug service for a team");
  s->add_option("--team", serve_team, "team file")->required();
  s->add_option("--host", serve.host, "bind address");
  s->add_option("--port", serve.port, "listen port (0 picks a free one)");
  std::string checkpoint_dir;
  s->add_option("--checkpoint-dir", checkpoint_dir, "persist checkpoints under this directory");

  cli::RunOptions run;
  std::string run_team, export_dir;
  std::size_t max_steps = 0;
  auto* r = app.add_subcommand("run", "Run a team's task fixture headlessly and export the session");
  r->add_option("--team", run_team, "team file")->required();
  auto* r_max = r->add_option("--max-steps", max_steps, "step ceiling");
  auto* r_exp = r->add_option("--export-dir", export_dir, "export directory (default $REWIND_EXPORT_DIR or ./exports)");

  cli::ReplayOptions replay;
  std::string log_path, replay_team;
  auto* p = app.add_subcommand("replay", "Re-execute an exported session log and diff it");
  p->add_option("log", log_path, "session log")->required();
  auto* p_team = p->add_option("--team", replay_team, "team file (default: the one named in the log)");

  cli::VerifyOptions verify;
  std::string verify_team;
  auto* v = app.add_subcommand("verify", "Run a fixture repeatedly and check the exports are identical");
  v->add_option("--team", verify_team, "team file")->required();
  v->add_option("--runs", verify.runs, "number of runs");

  CLI11_PARSE(app, argc, argv);

  if (s->parsed()) {
    serve.team = serve_team;
    if (!checkpoint_dir.empty()) serve.checkpoint_dir = checkpoint_dir;
    return cli::cmd_serve(serve, std::cout, std::cerr);
  }
  if (r->parsed()) {
    run.team = run_team;
    if (r_max->count()) run.max_steps = max_steps;
    if (r_exp->count()) run.export_dir = export_dir;
    return cli::cmd_run(run, std::cout, std::cerr);
  }
  if (p->parsed()) {
    replay.log = log_path;
    if (p_team->count()) replay.team = replay_team;
    return cli::cmd_replay(replay, std::cout, std::cerr);
  }
  verify.team = verify_team;
  return cli::cmd_verify(verify, std::cout, std::cerr);
}
