#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

namespace timetravel::agents {

struct EvalError {
  std::size_t position = 0;
  std::string message;
};

/// Evaluates + - * / with parentheses, unary minus and decimal literals.
/// Error positions are 0-based offsets into `expr`.
std::variant<double, EvalError> evaluate_expression(std::string_view expr);

/// Integral values print without a fractional part.
std::string format_number(double v);

}  // namespace timetravel::agents
