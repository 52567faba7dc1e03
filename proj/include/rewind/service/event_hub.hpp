#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace timetravel::service {

struct ApiEvent {
  std::uint64_t event_seq = 0;
  std::string event_type;
  nlohmann::json payload;
};

nlohmann::json to_json(const ApiEvent& e);
/// Server-sent-events frame: id, event and data lines.
std::string sse_frame(const ApiEvent& e);

/// Fans committed events out to every subscriber in commit order.
class EventHub {
 public:
  class Subscription {
   public:
    /// Waits up to `timeout_ms` for the next event.
    std::optional<ApiEvent> next(int timeout_ms);
    bool closed() const;

   private:
    friend class EventHub;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<ApiEvent> pending_;
    bool closed_ = false;
  };

  std::shared_ptr<Subscription> subscribe();
  void unsubscribe(const std::shared_ptr<Subscription>& sub);
  ApiEvent publish(std::string type, nlohmann::json payload);
  void close_all();

  std::size_t subscriber_count() const;
  std::uint64_t last_event_seq() const;

 private:
  mutable std::mutex mutex_;
  std::uint64_t next_seq_ = 1;
  std::vector<std::shared_ptr<Subscription>> subs_;
};

}  // namespace timetravel::service
