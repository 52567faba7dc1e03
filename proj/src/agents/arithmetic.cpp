#include "rewind/agents/arithmetic.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace timetravel::agents {

namespace {

struct ParseFailure {
  EvalError error;
};

// expr   := term (('+'|'-') term)*
// term   := factor (('*'|'/') factor)*
// factor := '-' factor | number | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  double parse() {
    double v = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(std::string message) { throw ParseFailure{EvalError{pos_, std::move(message)}}; }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    while (true) {
      if (accept('+')) v += term();
      else if (accept('-')) v -= term();
      else return v;
    }
  }

  double term() {
    double v = factor();
    while (true) {
      if (accept('*')) {
        v *= factor();
      } else if (accept('/')) {
        skip_ws();
        std::size_t at = pos_;
        double d = factor();
        if (d == 0.0) throw ParseFailure{EvalError{at, "division by zero"}};
        v /= d;
      } else {
        return v;
      }
    }
  }

  double factor() {
    if (accept('-')) return -factor();
    if (accept('(')) {
      double v = expr();
      if (!accept(')')) fail("expected ')'");
      return v;
    }
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (start == pos_) fail("expected a number");
    std::string literal(src_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(literal.c_str(), &end);
    if (end != literal.c_str() + literal.size()) {
      pos_ = start;
      fail("malformed number '" + literal + "'");
    }
    return v;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

std::variant<double, EvalError> evaluate_expression(std::string_view expr) {
  try {
    return Parser(expr).parse();
  } catch (const ParseFailure& f) {
    return f.error;
  }
}

std::string format_number(double v) {
  if (std::isfinite(v) && std::fabs(v) < 1e15 && v == std::floor(v)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", v == 0.0 ? 0.0 : v);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace timetravel::agents
