#include "rewind/agent.hpp"

#include <algorithm>

#include "rewind/error.hpp"

namespace timetravel {

std::string_view to_string(ConfigField::Type t) {
  switch (t) {
    case ConfigField::Type::text: return "text";
    case ConfigField::Type::number: return "number";
    case ConfigField::Type::integer: return "integer";
    case ConfigField::Type::boolean: return "boolean";
  }
  return "text";
}

json to_json(const ConfigSchema& schema) {
  json out = json::array();
  for (const auto& f : schema) {
    json j{{"key", f.key}, {"type", to_string(f.type)}, {"description", f.description}};
    if (f.min) j["min"] = *f.min;
    if (f.max) j["max"] = *f.max;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> validate_config(const ConfigSchema& schema, const json& doc) {
  std::vector<std::pair<std::string, std::string>> problems;
  if (!doc.is_object()) {
    problems.emplace_back("", "configuration must be an object");
    return problems;
  }
  for (const auto& [key, value] : doc.items()) {
    auto it = std::find_if(schema.begin(), schema.end(), [&](const ConfigField& f) { return f.key == key; });
    if (it == schema.end()) {
      problems.emplace_back(key, "unknown key");
      continue;
    }
    bool type_ok = false;
    switch (it->type) {
      case ConfigField::Type::text: type_ok = value.is_string(); break;
      case ConfigField::Type::number: type_ok = value.is_number(); break;
      case ConfigField::Type::integer: type_ok = value.is_number_integer(); break;
      case ConfigField::Type::boolean: type_ok = value.is_boolean(); break;
    }
    if (!type_ok) {
      problems.emplace_back(key, "expected " + std::string(to_string(it->type)));
      continue;
    }
    if (value.is_number()) {
      double v = value.get<double>();
      if ((it->min && v < *it->min) || (it->max && v > *it->max)) {
        std::string range = "[" + (it->min ? json(*it->min).dump() : "-inf") + ", " +
                            (it->max ? json(*it->max).dump() : "inf") + "]";
        problems.emplace_back(key, "out of range " + range);
      }
    }
  }
  return problems;
}

json to_json(const AgentDescriptor& d) {
  return json{{"name", d.name},
              {"type", d.type},
              {"handled_kinds", d.handled_kinds},
              {"description", d.description},
              {"config_schema", to_json(d.schema)}};
}

void AgentContext::send(std::string recipient, std::string kind, json payload) {
  emitted_.push_back(OutgoingMessage{std::move(recipient), std::move(kind), std::move(payload)});
}

void AgentContext::reply(const Envelope& to, std::string kind, std::string body) {
  send(to.sender, std::move(kind), make_payload(std::move(body)));
}

void AgentContext::think(std::string text) { thoughts_.push_back(std::move(text)); }

Agent::Agent(AgentDescriptor descriptor) : descriptor_(std::move(descriptor)) {
  if (descriptor_.name.empty()) throw Error(ErrorCode::invalid_argument, "agent name must not be empty");
  if (descriptor_.handled_kinds.empty())
    throw Error(ErrorCode::invalid_argument, "agent '" + descriptor_.name + "' must handle at least one kind");
}

bool Agent::handles(std::string_view kind) const { return descriptor_.handled_kinds.count(std::string(kind)) != 0; }

void Agent::init_config(json defaults) { config_ = std::move(defaults); }

void Agent::set_config(const json& patch) {
  auto problems = validate_config(descriptor_.schema, patch);
  if (!problems.empty()) {
    json detail = json::object();
    std::string keys;
    for (const auto& [key, why] : problems) {
      detail[key.empty() ? "$" : key] = why;
      keys += (keys.empty() ? "" : ", ") + key;
    }
    throw Error(ErrorCode::schema_violation, "invalid configuration for '" + name() + "': " + keys,
                json{{"offending_keys", detail}});
  }
  json merged = config_;
  merged.update(patch);
  apply_config(merged);
  config_ = std::move(merged);
}

void Agent::apply_config(const json&) {}

json state_document(const Agent& agent) {
  return json{{"schema_version", agent.state_schema_version()}, {"content", agent.save_state()}};
}

void load_state_document(Agent& agent, const json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version") || !doc.contains("content"))
    throw Error(ErrorCode::parse_error, "state document for '" + agent.name() + "' is malformed");
  if (doc["schema_version"] != agent.state_schema_version())
    throw Error(ErrorCode::version_mismatch, "state document for '" + agent.name() + "' has schema_version " +
                                                 doc["schema_version"].dump());
  agent.load_state(doc["content"]);
}

}  // namespace timetravel
