#include "rewind/agents/executor.hpp"

#include <cctype>

#include "rewind/agents/arithmetic.hpp"
#include "rewind/agents/script.hpp"
#include "rewind/error.hpp"

namespace timetravel::agents {

AgentDescriptor executor_descriptor(std::string name) {
  return AgentDescriptor{std::move(name),
                         "executor",
                         {"task"},
                         "Runs arithmetic code blocks and reports the value",
                         {{"max_expression_length", ConfigField::Type::integer, 1, 100000, "longest accepted code"}}};
}

ExecutorAgent::ExecutorAgent(AgentDescriptor descriptor) : Agent(std::move(descriptor)) {
  init_config(json{{"max_expression_length", 4096}});
}

std::string extract_expression(std::string_view body) {
  if (auto code = extract_code_block(body)) return *code;
  std::string text(body);
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  for (std::string_view verb : {"compute", "evaluate", "run"}) {
    if (to_lower(text.substr(i, verb.size())) == verb &&
        (i + verb.size() == text.size() || !std::isalpha(static_cast<unsigned char>(text[i + verb.size()])))) {
      i += verb.size();
      while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ':')) ++i;
      break;
    }
  }
  return text.substr(i);
}

void ExecutorAgent::handle(const Envelope& envelope, AgentContext& ctx) {
  if (envelope.is_broadcast()) return;
  const std::string expr = extract_expression(envelope.body());
  if (expr.size() > config()["max_expression_length"].get<std::size_t>()) {
    ctx.reply(envelope, std::string(kinds::report), "error: code exceeds max_expression_length");
    return;
  }
  auto result = evaluate_expression(expr);
  if (auto err = std::get_if<EvalError>(&result)) {
    json payload{{"body", "error: " + err->message + " at position " + std::to_string(err->position)},
                 {"error", {{"position", err->position}, {"message", err->message}}}};
    ctx.send(envelope.sender, std::string(kinds::report), std::move(payload));
    return;
  }
  ctx.reply(envelope, std::string(kinds::report), format_number(std::get<double>(result)));
}

void ExecutorAgent::load_state(const json& content) {
  if (!content.is_object() || !content.empty())
    throw Error(ErrorCode::invalid_argument, "executor state must be empty");
}

}  // namespace timetravel::agents
