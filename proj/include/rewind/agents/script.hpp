#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rewind/envelope.hpp"

namespace timetravel::agents {

/// Match condition over one incoming envelope. Substring tests are
/// case-insensitive; every present clause must hold.
struct Condition {
  std::optional<std::string> kind;
  std::optional<std::string> sender;
  std::optional<bool> directed;
  std::vector<std::string> all;
  std::vector<std::string> any;
  std::vector<std::string> none;
  /// agent variables that must equal the given values
  json vars = json::object();

  bool matches(const Envelope& e, const json& agent_vars) const;
};

struct Rule {
  std::string name;
  Condition when;
  /// agent-specific effect document
  json then = json::object();
};

/// Ordered rule list with a mandatory default. The first matching rule fires.
class Script {
 public:
  static Script parse(const json& doc, std::string_view origin = "<inline>");
  static Script load(const std::filesystem::path& path);

  const Rule& match(const Envelope& e, const json& vars) const;

  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& default_rule() const { return default_; }
  const json& initial_vars() const { return initial_vars_; }
  const std::string& origin() const { return origin_; }

 private:
  std::vector<Rule> rules_;
  Rule default_;
  json initial_vars_ = json::object();
  std::string origin_;
};

/// Expands placeholders in a rule template against the incoming envelope:
///   {body} {sender} {recipient} {kind}
///   {code}               first fenced code block of the body (or the body)
///   {field:k}            first `k=value` in the body
///   {fields:k}           every `k=value`, in order, joined by ", "
///   {fields_sorted:k}    the same, sorted alphabetically
///   {var:k}              agent variable
std::string render_template(std::string_view tmpl, const Envelope& e, const json& vars);

std::vector<std::string> extract_fields(std::string_view body, std::string_view key);
std::optional<std::string> extract_code_block(std::string_view body);

std::string to_lower(std::string_view s);
bool contains_ci(std::string_view haystack, std::string_view needle);

}  // namespace timetravel::agents
