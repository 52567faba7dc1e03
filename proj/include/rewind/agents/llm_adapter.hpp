#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rewind/agent.hpp"

namespace timetravel::agents {

struct ChatTurn {
  std::string role;
  std::string content;

  bool operator==(const ChatTurn&) const = default;
};

struct CompletionRequest {
  std::string model;
  double temperature = 0.0;
  std::string system_prompt;
  std::vector<ChatTurn> messages;

  /// FNV-1a over the system prompt and messages, as 16 hex digits.
  std::string context_hash() const;
  json to_json() const;
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  /// Throws BackendUnavailable when no completion can be produced.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Deterministic backend: replies are looked up by context hash, then by
/// the last message's text, then the fallback. Every request is captured.
class CannedBackend : public CompletionBackend {
 public:
  CannedBackend() = default;
  static std::shared_ptr<CannedBackend> from_file(const std::filesystem::path& path);

  void add_reply_for_hash(std::string hash, std::string reply);
  void add_reply_for_message(std::string last_message, std::string reply);
  void set_fallback(std::optional<std::string> reply);
  void set_available(bool available);

  std::string complete(const CompletionRequest& request) override;

  std::vector<CompletionRequest> requests() const;
  std::optional<CompletionRequest> last_request() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> by_hash_;
  std::map<std::string, std::string> by_message_;
  std::optional<std::string> fallback_;
  bool available_ = true;
  std::vector<CompletionRequest> requests_;
};

/// OpenAI-compatible chat-completions client over plain HTTP.
class HttpCompletionBackend : public CompletionBackend {
 public:
  HttpCompletionBackend(std::string base_url, std::string path = "/v1/chat/completions",
                        std::optional<std::string> api_key = std::nullopt);
  std::string complete(const CompletionRequest& request) override;

 private:
  std::string base_url_;
  std::string path_;
  std::optional<std::string> api_key_;
};

/// Adapter seam for real model backends. Tracks its own message history as
/// completion context; the history is its checkpointed state.
class LlmAdapterAgent : public Agent {
 public:
  LlmAdapterAgent(AgentDescriptor descriptor, std::shared_ptr<CompletionBackend> backend, json config = json::object());

  void handle(const Envelope& envelope, AgentContext& ctx) override;
  json save_state() const override;
  void load_state(const json& content) override;

  const std::vector<ChatTurn>& history() const { return history_; }

 private:
  std::shared_ptr<CompletionBackend> backend_;
  std::vector<ChatTurn> history_;
};

AgentDescriptor llm_adapter_descriptor(std::string name);

}  // namespace timetravel::agents
