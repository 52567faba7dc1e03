#include "rewind/agents/llm_adapter.hpp"

#include <cstdio>
#include <fstream>

#include <httplib.h>

#include "rewind/error.hpp"

namespace timetravel::agents {

std::string CompletionRequest::context_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    // Separator so ("ab","c") and ("a","bc") hash differently.
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  mix(system_prompt);
  for (const auto& m : messages) {
    mix(m.role);
    mix(m.content);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json CompletionRequest::to_json() const {
  json msgs = json::array();
  if (!system_prompt.empty()) msgs.push_back({{"role", "system"}, {"content", system_prompt}});
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", model}, {"temperature", temperature}, {"messages", std::move(msgs)}};
}

std::shared_ptr<CannedBackend> CannedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "canned transcript not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, "canned transcript " + path.string() + ": " + e.what());
  }
  auto backend = std::make_shared<CannedBackend>();
  const json replies = doc.value("replies", json::object());
  const json by_message = doc.value("by_message", json::object());
  for (const auto& [k, v] : replies.items()) backend->add_reply_for_hash(k, v.get<std::string>());
  for (const auto& [k, v] : by_message.items()) backend->add_reply_for_message(k, v.get<std::string>());
  if (doc.contains("fallback") && doc["fallback"].is_string()) backend->set_fallback(doc["fallback"].get<std::string>());
  return backend;
}

void CannedBackend::add_reply_for_hash(std::string hash, std::string reply) {
  std::lock_guard lock(mutex_);
  by_hash_[std::move(hash)] = std::move(reply);
}

void CannedBackend::add_reply_for_message(std::string last_message, std::string reply) {
  std::lock_guard lock(mutex_);
  by_message_[std::move(last_message)] = std::move(reply);
}

void CannedBackend::set_fallback(std::optional<std::string> reply) {
  std::lock_guard lock(mutex_);
  fallback_ = std::move(reply);
}

void CannedBackend::set_available(bool available) {
  std::lock_guard lock(mutex_);
  available_ = available;
}

std::string CannedBackend::complete(const CompletionRequest& request) {
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
  if (!available_) throw BackendUnavailable("canned backend disabled");
  if (auto it = by_hash_.find(request.context_hash()); it != by_hash_.end()) return it->second;
  if (!request.messages.empty()) {
    if (auto it = by_message_.find(request.messages.back().content); it != by_message_.end()) return it->second;
  }
  if (fallback_) return *fallback_;
  throw BackendUnavailable("no canned reply for context " + request.context_hash());
}

std::vector<CompletionRequest> CannedBackend::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::optional<CompletionRequest> CannedBackend::last_request() const {
  std::lock_guard lock(mutex_);
  if (requests_.empty()) return std::nullopt;
  return requests_.back();
}

HttpCompletionBackend::HttpCompletionBackend(std::string base_url, std::string path, std::optional<std::string> api_key)
    : base_url_(std::move(base_url)), path_(std::move(path)), api_key_(std::move(api_key)) {}

std::string HttpCompletionBackend::complete(const CompletionRequest& request) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(5);
  client.set_read_timeout(60);
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);
  auto res = client.Post(path_, headers, request.to_json().dump(), "application/json");
  if (!res) throw BackendUnavailable("completion request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendUnavailable("completion backend returned HTTP " + std::to_string(res->status));
  try {
    auto doc = json::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendUnavailable(std::string("malformed completion response: ") + e.what());
  }
}

AgentDescriptor llm_adapter_descriptor(std::string name) {
  return AgentDescriptor{std::move(name),
                         "llm_adapter",
                         {"task"},
                         "Forwards its conversation to a completion backend",
                         {{"system_prompt", ConfigField::Type::text, {}, {}, "prepended to every request"},
                          {"model_name", ConfigField::Type::text, {}, {}, "model identifier sent to the backend"},
                          {"temperature", ConfigField::Type::number, 0.0, 1.0, "sampling temperature"}}};
}

LlmAdapterAgent::LlmAdapterAgent(AgentDescriptor descriptor, std::shared_ptr<CompletionBackend> backend, json config)
    : Agent(std::move(descriptor)), backend_(std::move(backend)) {
  json defaults{{"system_prompt", "You are a helpful assistant."}, {"model_name", "canned"}, {"temperature", 0.0}};
  if (config.is_object()) defaults.merge_patch(config);
  init_config(std::move(defaults));
}

void LlmAdapterAgent::handle(const Envelope& envelope, AgentContext& ctx) {
  const std::string turn = envelope.sender + ": " + envelope.body();
  if (envelope.is_broadcast()) {
    history_.push_back({"user", turn});
    return;
  }
  CompletionRequest request;
  request.model = config()["model_name"].get<std::string>();
  request.temperature = config()["temperature"].get<double>();
  request.system_prompt = config()["system_prompt"].get<std::string>();
  request.messages = history_;
  request.messages.push_back({"user", turn});
  std::string reply;
  try {
    reply = backend_->complete(request);
  } catch (const BackendUnavailable& e) {
    ctx.send(envelope.sender, std::string(kinds::report),
             json{{"body", std::string("error: backend unavailable: ") + e.what()}, {"error", "backend-unavailable"}});
    return;
  }
  history_ = std::move(request.messages);
  history_.push_back({"assistant", reply});
  ctx.reply(envelope, std::string(kinds::report), reply);
}

json LlmAdapterAgent::save_state() const {
  json turns = json::array();
  for (const auto& t : history_) turns.push_back({{"role", t.role}, {"content", t.content}});
  return json{{"history", std::move(turns)}};
}

void LlmAdapterAgent::load_state(const json& content) {
  std::vector<ChatTurn> turns;
  for (const auto& t : content.at("history")) turns.push_back({t.at("role").get<std::string>(), t.at("content").get<std::string>()});
  history_ = std::move(turns);
}

}  // namespace timetravel::agents
