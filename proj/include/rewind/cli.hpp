#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace timetravel::cli {

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int fail = 1;
inline constexpr int unknown = 2;
inline constexpr int load_error = 3;
}  // namespace exit_code

inline constexpr const char* kExportDirEnv = "REWIND_EXPORT_DIR";

struct RunOptions {
  std::filesystem::path team;
  std::optional<std::size_t> max_steps;
  std::optional<std::filesystem::path> export_dir;
};

/// Export directory: explicit flag, else $REWIND_EXPORT_DIR, else ./exports.
std::filesystem::path resolve_export_dir(const std::optional<std::filesystem::path>& flag);

/// Headless run of a team's task fixture. Exit 0 pass, 1 fail, 2 unknown,
/// 3 load failure. Always exports the session log.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err,
            std::filesystem::path* exported = nullptr);

struct ReplayOptions {
  std::filesystem::path log;
  std::optional<std::filesystem::path> team;
};

/// Re-executes an exported log and diffs it. Exit 0 on an empty diff,
/// 1 on divergence, 3 when the log or team cannot be loaded.
int cmd_replay(const ReplayOptions& options, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::filesystem::path team;
  std::size_t runs = 10;
  std::optional<std::size_t> max_steps;
};

/// Runs the fixture repeatedly and checks every normalized export is identical.
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);

struct ServeOptions {
  std::filesystem::path team;
  std::string host = "127.0.0.1";
  int port = 8123;
  std::optional<std::filesystem::path> checkpoint_dir;
};

/// Blocks until SIGINT/SIGTERM. Exit 3 when the team cannot be loaded.
int cmd_serve(const ServeOptions& options, std::ostream& out, std::ostream& err);

}  // namespace timetravel::cli
