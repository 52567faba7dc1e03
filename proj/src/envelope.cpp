#include "rewind/envelope.hpp"

#include <ctime>
#include <iomanip>
#include <sstream>

#include "rewind/error.hpp"

namespace timetravel {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::original: return "original";
    case Provenance::user_injected: return "user-injected";
    case Provenance::edited: return "edited";
  }
  return "original";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "original") return Provenance::original;
  if (s == "user-injected") return Provenance::user_injected;
  if (s == "edited") return Provenance::edited;
  throw Error(ErrorCode::invalid_argument, "unknown provenance '" + std::string(s) + "'");
}

const std::string& Envelope::body() const { return payload_body(payload); }

const Envelope* HistoryItem::envelope() const {
  auto p = std::get_if<EnvelopePtr>(&entry);
  return p ? p->get() : nullptr;
}

const Thought* HistoryItem::thought() const {
  auto p = std::get_if<ThoughtPtr>(&entry);
  return p ? p->get() : nullptr;
}

Seq HistoryItem::seq() const {
  if (auto e = envelope()) return e->seq;
  return thought()->seq_anchor;
}

json make_payload(std::string body) { return json{{"body", std::move(body)}}; }

bool has_body(const json& payload) {
  return payload.is_object() && payload.contains("body") && payload["body"].is_string();
}

const std::string& payload_body(const json& payload) {
  static const std::string empty;
  if (!has_body(payload)) return empty;
  return payload["body"].get_ref<const std::string&>();
}

std::string format_timestamp(Clock::time_point t) {
  auto secs = std::chrono::time_point_cast<std::chrono::seconds>(t);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t - secs).count();
  std::time_t tt = Clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return os.str();
}

namespace {

Clock::time_point parse_timestamp(const std::string& s) {
  std::tm tm{};
  std::istringstream is(s);
  is >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (is.fail()) return {};
  int ms = 0;
  if (is.peek() == '.') {
    is.get();
    is >> ms;
  }
  auto t = Clock::from_time_t(timegm(&tm));
  return t + std::chrono::milliseconds(ms);
}

}  // namespace

json to_json(const Envelope& e) {
  return json{{"message_id", e.message_id},
              {"seq", e.seq},
              {"session_id", e.session_id},
              {"sender", e.sender},
              {"recipient", e.recipient},
              {"kind", e.kind},
              {"payload", e.payload},
              {"provenance", to_string(e.provenance)},
              {"timestamp", format_timestamp(e.timestamp)}};
}

json to_json(const Thought& t) {
  return json{{"agent", t.agent}, {"seq_anchor", t.seq_anchor}, {"text", t.text}, {"session_id", t.session_id}};
}

json to_json(const HistoryItem& item) {
  json j;
  if (auto e = item.envelope()) {
    j = to_json(*e);
    j["type"] = "envelope";
  } else {
    j = to_json(*item.thought());
    j["type"] = "thought";
  }
  j["inherited"] = item.inherited;
  return j;
}

Envelope envelope_from_json(const json& j) {
  try {
    Envelope e;
    e.message_id = j.value("message_id", "");
    e.seq = j.at("seq").get<Seq>();
    e.session_id = j.value("session_id", "");
    e.sender = j.at("sender").get<std::string>();
    e.recipient = j.at("recipient").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.at("payload");
    e.provenance = provenance_from_string(j.value("provenance", "original"));
    if (j.contains("timestamp")) e.timestamp = parse_timestamp(j["timestamp"].get<std::string>());
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::parse_error, std::string("malformed envelope: ") + ex.what());
  }
}

Thought thought_from_json(const json& j) {
  try {
    return Thought{j.at("agent").get<std::string>(), j.at("seq_anchor").get<Seq>(), j.at("text").get<std::string>(),
                   j.value("session_id", "")};
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::parse_error, std::string("malformed thought: ") + ex.what());
  }
}

json routing_view(const Envelope& e) {
  return json{{"seq", e.seq},           {"sender", e.sender},   {"recipient", e.recipient},
              {"kind", e.kind},         {"payload", e.payload}, {"provenance", to_string(e.provenance)}};
}

}  // namespace timetravel
