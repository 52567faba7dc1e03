#include "rewind/agents/script.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "rewind/error.hpp"

namespace timetravel::agents {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool Condition::matches(const Envelope& e, const json& agent_vars) const {
  if (kind && *kind != e.kind) return false;
  if (sender && *sender != e.sender) return false;
  if (directed && *directed == e.is_broadcast()) return false;
  const std::string body = to_lower(e.body());
  for (const auto& s : all)
    if (body.find(to_lower(s)) == std::string::npos) return false;
  if (!any.empty() &&
      std::none_of(any.begin(), any.end(), [&](const std::string& s) { return body.find(to_lower(s)) != std::string::npos; }))
    return false;
  for (const auto& s : none)
    if (body.find(to_lower(s)) != std::string::npos) return false;
  for (const auto& [key, value] : vars.items()) {
    if (!agent_vars.contains(key) || agent_vars[key] != value) return false;
  }
  return true;
}

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

Condition parse_condition(const json& j) {
  Condition c;
  if (j.contains("kind")) c.kind = j["kind"].get<std::string>();
  if (j.contains("sender")) c.sender = j["sender"].get<std::string>();
  if (j.contains("directed")) c.directed = j["directed"].get<bool>();
  c.all = string_list(j, "all");
  c.any = string_list(j, "any");
  c.none = string_list(j, "none");
  if (j.contains("vars")) c.vars = j["vars"];
  return c;
}

}  // namespace

Script Script::parse(const json& doc, std::string_view origin) {
  Script s;
  s.origin_ = std::string(origin);
  try {
    if (!doc.is_object()) throw Error(ErrorCode::parse_error, "script must be an object");
    if (doc.contains("rules")) {
      std::size_t i = 0;
      for (const auto& r : doc["rules"]) {
        Rule rule;
        rule.name = r.value("name", "rule-" + std::to_string(i++));
        rule.when = parse_condition(r.value("when", json::object()));
        rule.then = r.value("then", json::object());
        s.rules_.push_back(std::move(rule));
      }
    }
    if (!doc.contains("default"))
      throw Error(ErrorCode::parse_error, "script " + s.origin_ + " has no default rule");
    s.default_.name = doc["default"].value("name", "default");
    s.default_.then = doc["default"].value("then", json::object());
    s.initial_vars_ = doc.value("vars", json::object());
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::parse_error, "malformed script " + s.origin_ + ": " + ex.what());
  }
  return s;
}

Script Script::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "script file not found: " + path.string(), json{{"path", path.string()}});
  try {
    return parse(json::parse(in), path.string());
  } catch (const json::parse_error& ex) {
    throw Error(ErrorCode::parse_error, "malformed script " + path.string() + ": " + ex.what(),
                json{{"path", path.string()}});
  }
}

const Rule& Script::match(const Envelope& e, const json& vars) const {
  for (const auto& r : rules_)
    if (r.when.matches(e, vars)) return r;
  return default_;
}

std::vector<std::string> extract_fields(std::string_view body, std::string_view key) {
  std::vector<std::string> out;
  const std::string needle = std::string(key) + "=";
  std::size_t pos = 0;
  while ((pos = body.find(needle, pos)) != std::string_view::npos) {
    bool boundary = pos == 0 || !(std::isalnum(static_cast<unsigned char>(body[pos - 1])) || body[pos - 1] == '_');
    std::size_t start = pos + needle.size();
    pos = start;
    if (!boundary) continue;
    std::size_t end = start;
    while (end < body.size() && body[end] != ';' && body[end] != '\n' &&
           !(body[end] == '.' && (end + 1 == body.size() || body[end + 1] == ' ')))
      ++end;
    std::string value(body.substr(start, end - start));
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) value.pop_back();
    out.push_back(std::move(value));
  }
  return out;
}

std::optional<std::string> extract_code_block(std::string_view body) {
  auto open = body.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto line_end = body.find('\n', open);
  if (line_end == std::string_view::npos) return std::nullopt;
  auto close = body.find("```", line_end + 1);
  if (close == std::string_view::npos) return std::nullopt;
  std::string code(body.substr(line_end + 1, close - line_end - 1));
  while (!code.empty() && std::isspace(static_cast<unsigned char>(code.back()))) code.pop_back();
  std::size_t lead = 0;
  while (lead < code.size() && std::isspace(static_cast<unsigned char>(code[lead]))) ++lead;
  return code.substr(lead);
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

std::string var_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

std::string render_template(std::string_view tmpl, const Envelope& e, const json& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out.push_back(tmpl[i++]);
      continue;
    }
    auto close = tmpl.find('}', i);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    std::string_view token = tmpl.substr(i + 1, close - i - 1);
    std::string_view name = token, arg;
    if (auto colon = token.find(':'); colon != std::string_view::npos) {
      name = token.substr(0, colon);
      arg = token.substr(colon + 1);
    }
    if (name == "body") {
      out += e.body();
    } else if (name == "sender") {
      out += e.sender;
    } else if (name == "recipient") {
      out += e.recipient;
    } else if (name == "kind") {
      out += e.kind;
    } else if (name == "code") {
      out += extract_code_block(e.body()).value_or(e.body());
    } else if (name == "field") {
      auto f = extract_fields(e.body(), arg);
      if (!f.empty()) out += f.front();
    } else if (name == "fields") {
      out += join(extract_fields(e.body(), arg));
    } else if (name == "fields_sorted") {
      auto f = extract_fields(e.body(), arg);
      std::sort(f.begin(), f.end());
      out += join(f);
    } else if (name == "var") {
      if (vars.contains(std::string(arg))) out += var_text(vars[std::string(arg)]);
    } else {
      out.append(tmpl.substr(i, close - i + 1));
    }
    i = close + 1;
  }
  return out;
}

}  // namespace timetravel::agents
