#pragma once

#include <string>

#include "rewind/agent.hpp"

namespace timetravel::agents {

/// Stateless code runner: evaluates the arithmetic in the message's first
/// fenced block (or in the body, minus a leading "compute"/"evaluate"/"run")
/// and reports the value back to the sender.
class ExecutorAgent : public Agent {
 public:
  explicit ExecutorAgent(AgentDescriptor descriptor);

  void handle(const Envelope& envelope, AgentContext& ctx) override;
  json save_state() const override { return json::object(); }
  void load_state(const json& content) override;
};

std::string extract_expression(std::string_view body);

AgentDescriptor executor_descriptor(std::string name);

}  // namespace timetravel::agents
