#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace timetravel {

using json = nlohmann::json;
using Seq = std::int64_t;
using Clock = std::chrono::system_clock;

inline constexpr std::string_view kBroadcast = "BROADCAST";
inline constexpr std::string_view kUser = "user";
inline constexpr std::string_view kSystem = "system";

namespace kinds {
inline constexpr std::string_view task = "task";
inline constexpr std::string_view report = "report";
inline constexpr std::string_view final_answer = "final-answer";
inline constexpr std::string_view handler_error = "handler-error";
}  // namespace kinds

enum class Provenance { original, user_injected, edited };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// One routed message as recorded in history. Immutable once recorded and
/// shared by pointer between a parent session and every child that inherits it.
struct Envelope {
  std::string message_id;
  Seq seq = 0;
  std::string session_id;
  std::string sender;
  std::string recipient;
  std::string kind;
  json payload = json::object();
  Provenance provenance = Provenance::original;
  Clock::time_point timestamp{};

  const std::string& body() const;
  bool is_broadcast() const { return recipient == kBroadcast; }
};

struct Thought {
  std::string agent;
  Seq seq_anchor = 0;
  std::string text;
  std::string session_id;
};

using EnvelopePtr = std::shared_ptr<const Envelope>;
using ThoughtPtr = std::shared_ptr<const Thought>;

struct HistoryItem {
  std::variant<EnvelopePtr, ThoughtPtr> entry;
  bool inherited = false;

  const Envelope* envelope() const;
  const Thought* thought() const;
  Seq seq() const;
};

/// Payload with a single text body.
json make_payload(std::string body);
/// Payload must be an object with a string "body".
bool has_body(const json& payload);
const std::string& payload_body(const json& payload);

std::string format_timestamp(Clock::time_point t);

json to_json(const Envelope& e);
json to_json(const Thought& t);
json to_json(const HistoryItem& item);
Envelope envelope_from_json(const json& j);
Thought thought_from_json(const json& j);

/// The fields that survive a deterministic re-run: everything except
/// message_id, session_id and timestamp.
json routing_view(const Envelope& e);

}  // namespace timetravel
