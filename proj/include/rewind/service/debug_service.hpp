#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "rewind/error.hpp"
#include "rewind/overview.hpp"
#include "rewind/runtime.hpp"
#include "rewind/service/event_hub.hpp"
#include "rewind/session_manager.hpp"
#include "rewind/team.hpp"

namespace httplib {
class Server;
}

namespace timetravel::service {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  /// 0 binds an ephemeral port
  int port = 8123;
  RuntimeOptions runtime;
};

/// HTTP API (/api/v1) over one runtime plus a server-sent-events stream at
/// /api/v1/events. Mutating requests are applied one at a time; `run` steps
/// on a worker thread so `pause` and reads stay responsive.
class DebugService {
 public:
  DebugService(TeamSpec team, ServiceOptions options = {});
  ~DebugService();

  DebugService(const DebugService&) = delete;
  DebugService& operator=(const DebugService&) = delete;

  /// Binds the listening socket and returns the bound port.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  /// bind() + listen() on a background thread.
  int start_background();
  void stop();

  Runtime& runtime() { return *runtime_; }
  SessionManager& sessions() { return sessions_; }
  EventHub& events() { return hub_; }
  const TeamSpec& team() const { return team_; }
  std::string base_url() const;

 private:
  void install_routes();
  void start_run(std::optional<std::size_t> max_steps);
  void join_worker();

  TeamSpec team_;
  ServiceOptions options_;
  std::unique_ptr<Runtime> runtime_;
  SessionManager sessions_;
  ColorPalette palette_;
  EventHub hub_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex writer_;
  std::mutex worker_mutex_;
  std::thread worker_;
  std::thread listener_;
  std::atomic<bool> stopping_{false};
  int bound_port_ = -1;
};

/// HTTP status class for a module error code (4xx client, 5xx server).
int http_status_for(ErrorCode code);

}  // namespace timetravel::service
