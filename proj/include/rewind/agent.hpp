#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rewind/envelope.hpp"

namespace timetravel {

struct ConfigField {
  enum class Type { text, number, integer, boolean };

  std::string key;
  Type type = Type::text;
  std::optional<double> min;
  std::optional<double> max;
  std::string description;
};

std::string_view to_string(ConfigField::Type t);

using ConfigSchema = std::vector<ConfigField>;

json to_json(const ConfigSchema& schema);

/// Checks `doc` against `schema`. Returns one entry per offending key
/// (unknown key, wrong type, out of range); empty when valid.
std::vector<std::pair<std::string, std::string>> validate_config(const ConfigSchema& schema, const json& doc);

struct AgentDescriptor {
  std::string name;
  std::string type;
  std::set<std::string> handled_kinds;
  std::string description;
  ConfigSchema schema;
};

json to_json(const AgentDescriptor& d);

struct OutgoingMessage {
  std::string recipient;
  std::string kind;
  json payload;
};

/// Collects what a handler produces while processing one envelope.
class AgentContext {
 public:
  void send(std::string recipient, std::string kind, json payload);
  void reply(const Envelope& to, std::string kind, std::string body);
  void think(std::string text);

  const std::vector<OutgoingMessage>& emitted() const { return emitted_; }
  const std::vector<std::string>& thoughts() const { return thoughts_; }

 private:
  std::vector<OutgoingMessage> emitted_;
  std::vector<std::string> thoughts_;
};

/// Handler/state/config contract every team member implements.
///
/// `save_state` returns the agent-defined content of its state document and
/// `load_state` accepts the same content back. Round-tripping must leave the
/// agent behaviorally equivalent: processing any message afterwards emits
/// exactly what the original would have emitted.
class Agent {
 public:
  explicit Agent(AgentDescriptor descriptor);
  virtual ~Agent() = default;

  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  const AgentDescriptor& descriptor() const { return descriptor_; }
  const std::string& name() const { return descriptor_.name; }
  bool handles(std::string_view kind) const;

  virtual void handle(const Envelope& envelope, AgentContext& ctx) = 0;

  virtual int state_schema_version() const { return 1; }
  virtual json save_state() const = 0;
  virtual void load_state(const json& content) = 0;

  const json& config() const { return config_; }
  /// Merges `patch` over the current configuration after validating it
  /// against the declared schema. Throws Error(schema_violation) listing
  /// offending keys; the configuration is unchanged on failure.
  void set_config(const json& patch);

 protected:
  /// Called with the merged configuration; may throw to reject it.
  virtual void apply_config(const json& merged);
  void init_config(json defaults);

 private:
  AgentDescriptor descriptor_;
  json config_ = json::object();
};

using AgentPtr = std::shared_ptr<Agent>;

/// {"schema_version": N, "content": ...}
json state_document(const Agent& agent);
/// Validates the envelope and hands `content` to load_state.
void load_state_document(Agent& agent, const json& doc);

}  // namespace timetravel
