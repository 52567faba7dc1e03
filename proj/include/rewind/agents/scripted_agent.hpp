#pragma once

#include <filesystem>
#include <string>

#include "rewind/agent.hpp"
#include "rewind/agents/script.hpp"

namespace timetravel::agents {

/// Rule-driven agent used for the orchestrator and coder roles.
///
/// A fired rule's `then` may hold:
///   "thought": template
///   "emit":    [{"to": name | "$sender", "kind": kind, "body": template}]
///   "set":     {var: value}       assignments
///   "advance": var                increments an integer variable
///
/// State is the variable map (the orchestrator keeps its plan-progress
/// counter there) plus a count of handled messages.
class ScriptedAgent : public Agent {
 public:
  ScriptedAgent(AgentDescriptor descriptor, std::filesystem::path script_path, bool respond_to_broadcast);

  void handle(const Envelope& envelope, AgentContext& ctx) override;
  json save_state() const override;
  void load_state(const json& content) override;

  const json& vars() const { return vars_; }
  const Script& script() const { return script_; }

 protected:
  void apply_config(const json& merged) override;

 private:
  Script script_;
  json vars_ = json::object();
  std::int64_t handled_ = 0;
};

AgentDescriptor orchestrator_descriptor(std::string name);
AgentDescriptor coder_descriptor(std::string name);

}  // namespace timetravel::agents
