#include "rewind/agents/scripted_agent.hpp"

#include "rewind/error.hpp"

namespace timetravel::agents {

namespace {

ConfigSchema scripted_schema() {
  return {
      {"script", ConfigField::Type::text, {}, {}, "path to the rule script"},
      {"respond_to_broadcast", ConfigField::Type::boolean, {}, {}, "act on broadcast messages, not only directed ones"},
  };
}

}  // namespace

AgentDescriptor orchestrator_descriptor(std::string name) {
  return AgentDescriptor{std::move(name), "orchestrator", {"task", "report", "handler-error"},
                         "Plans the task and delegates sub-steps to the team", scripted_schema()};
}

AgentDescriptor coder_descriptor(std::string name) {
  return AgentDescriptor{std::move(name), "coder", {"task"}, "Writes code blocks that solve sub-problems",
                         scripted_schema()};
}

ScriptedAgent::ScriptedAgent(AgentDescriptor descriptor, std::filesystem::path script_path, bool respond_to_broadcast)
    : Agent(std::move(descriptor)), script_(Script::load(script_path)) {
  vars_ = script_.initial_vars();
  init_config(json{{"script", script_path.string()}, {"respond_to_broadcast", respond_to_broadcast}});
}

void ScriptedAgent::apply_config(const json& merged) {
  if (merged["script"] != config()["script"]) script_ = Script::load(merged["script"].get<std::string>());
}

void ScriptedAgent::handle(const Envelope& envelope, AgentContext& ctx) {
  if (envelope.is_broadcast() && !config()["respond_to_broadcast"].get<bool>()) return;

  const Rule& rule = script_.match(envelope, vars_);
  const json& then = rule.then;
  if (then.empty()) {
    ctx.send(std::string(kUser), std::string(kinds::report),
             make_payload("stuck: no rule of " + name() + " matches " + envelope.kind + " from " + envelope.sender));
  }
  if (then.contains("thought")) ctx.think(render_template(then["thought"].get<std::string>(), envelope, vars_));
  if (then.contains("emit")) {
    for (const auto& m : then["emit"]) {
      std::string to = m.value("to", "$sender");
      if (to == "$sender") to = envelope.sender;
      ctx.send(to, m.value("kind", std::string(kinds::report)),
               make_payload(render_template(m.value("body", ""), envelope, vars_)));
    }
  }
  if (then.contains("set"))
    for (const auto& [k, v] : then["set"].items()) vars_[k] = v;
  if (then.contains("advance")) {
    const auto key = then["advance"].get<std::string>();
    vars_[key] = vars_.value(key, 0) + 1;
  }
  ++handled_;
}

json ScriptedAgent::save_state() const { return json{{"vars", vars_}, {"handled", handled_}}; }

void ScriptedAgent::load_state(const json& content) {
  vars_ = content.at("vars");
  handled_ = content.at("handled").get<std::int64_t>();
}

}  // namespace timetravel::agents
