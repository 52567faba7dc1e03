#include "rewind/service/event_hub.hpp"

#include <algorithm>
#include <chrono>

namespace timetravel::service {

nlohmann::json to_json(const ApiEvent& e) {
  return nlohmann::json{{"event_seq", e.event_seq}, {"event_type", e.event_type}, {"payload", e.payload}};
}

std::string sse_frame(const ApiEvent& e) {
  return "id: " + std::to_string(e.event_seq) + "\nevent: " + e.event_type + "\ndata: " + to_json(e).dump() + "\n\n";
}

std::optional<ApiEvent> EventHub::Subscription::next(int timeout_ms) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), [this] { return closed_ || !pending_.empty(); });
  if (pending_.empty()) return std::nullopt;
  ApiEvent e = std::move(pending_.front());
  pending_.pop_front();
  return e;
}

bool EventHub::Subscription::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::shared_ptr<EventHub::Subscription> EventHub::subscribe() {
  auto sub = std::make_shared<Subscription>();
  std::lock_guard lock(mutex_);
  subs_.push_back(sub);
  return sub;
}

void EventHub::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mutex_);
  subs_.erase(std::remove(subs_.begin(), subs_.end(), sub), subs_.end());
}

// Sequence assignment and fan-out happen under one lock, so every
// subscriber sees the same events in the same order.
ApiEvent EventHub::publish(std::string type, nlohmann::json payload) {
  std::lock_guard lock(mutex_);
  ApiEvent e{next_seq_++, std::move(type), std::move(payload)};
  for (const auto& sub : subs_) {
    {
      std::lock_guard sub_lock(sub->mutex_);
      sub->pending_.push_back(e);
    }
    sub->cv_.notify_one();
  }
  return e;
}

void EventHub::close_all() {
  std::lock_guard lock(mutex_);
  for (const auto& sub : subs_) {
    {
      std::lock_guard sub_lock(sub->mutex_);
      sub->closed_ = true;
    }
    sub->cv_.notify_all();
  }
  subs_.clear();
}

std::size_t EventHub::subscriber_count() const {
  std::lock_guard lock(mutex_);
  return subs_.size();
}

std::uint64_t EventHub::last_event_seq() const {
  std::lock_guard lock(mutex_);
  return next_seq_ - 1;
}

}  // namespace timetravel::service
