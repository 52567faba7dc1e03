#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "rewind/agents/arithmetic.hpp"

using namespace timetravel::agents;

namespace {

// Independent oracle: a random expression tree is rendered to text and
// evaluated directly; the parser must agree.
struct Node {
  char op = 0;  // 0 for a literal
  double value = 0;
  std::unique_ptr<Node> lhs, rhs;
};

std::unique_ptr<Node> random_tree(std::mt19937& rng, int depth) {
  auto n = std::make_unique<Node>();
  if (depth == 0 || rng() % 3 == 0) {
    n->value = static_cast<double>(rng() % 20);
    return n;
  }
  n->op = "+-*/"[rng() % 4];
  n->lhs = random_tree(rng, depth - 1);
  n->rhs = random_tree(rng, depth - 1);
  return n;
}

/// nullopt on division by zero
std::optional<double> eval(const Node& n) {
  if (!n.op) return n.value;
  auto a = eval(*n.lhs), b = eval(*n.rhs);
  if (!a || !b) return std::nullopt;
  switch (n.op) {
    case '+': return *a + *b;
    case '-': return *a - *b;
    case '*': return *a * *b;
    default:
      if (*b == 0) return std::nullopt;
      return *a / *b;
  }
}

std::string render(const Node& n, std::mt19937& rng) {
  if (!n.op) return std::to_string(static_cast<int>(n.value));
  const std::string pad = rng() % 2 ? " " : "";
  return "(" + render(*n.lhs, rng) + pad + n.op + pad + render(*n.rhs, rng) + ")";
}

}  // namespace

TEST(Arithmetic, Precedence) {
  auto r = evaluate_expression("2+2*3");
  ASSERT_TRUE(std::holds_alternative<double>(r));
  EXPECT_EQ(std::get<double>(r), 8);
  EXPECT_EQ(std::get<double>(evaluate_expression("(2+2)*3")), 12);
  EXPECT_EQ(std::get<double>(evaluate_expression("10-4-3")), 3);
  EXPECT_EQ(std::get<double>(evaluate_expression("8/4/2")), 1);
  EXPECT_EQ(std::get<double>(evaluate_expression("-3*-2")), 6);
  EXPECT_DOUBLE_EQ(std::get<double>(evaluate_expression(" 1.5 + .25 ")), 1.75);
}

TEST(Arithmetic, TrailingOperatorErrorPosition) {
  auto r = evaluate_expression("2+");
  ASSERT_TRUE(std::holds_alternative<EvalError>(r));
  EXPECT_EQ(std::get<EvalError>(r).position, 2u);
}

TEST(Arithmetic, OtherErrors) {
  EXPECT_EQ(std::get<EvalError>(evaluate_expression("2+x")).position, 2u);
  EXPECT_EQ(std::get<EvalError>(evaluate_expression("(1+2")).position, 4u);
  EXPECT_EQ(std::get<EvalError>(evaluate_expression("1 2")).position, 2u);
  EXPECT_TRUE(std::holds_alternative<EvalError>(evaluate_expression("")));
  EXPECT_TRUE(std::holds_alternative<EvalError>(evaluate_expression("1/0")));
}

TEST(Arithmetic, FormatNumber) {
  EXPECT_EQ(format_number(4), "4");
  EXPECT_EQ(format_number(-12), "-12");
  EXPECT_EQ(format_number(519), "519");
  EXPECT_EQ(format_number(2.5), "2.5");
}

TEST(Arithmetic, AgreesWithTreeOracle) {
  std::mt19937 rng(2024);
  int evaluated = 0;
  for (int i = 0; i < 2000; ++i) {
    auto tree = random_tree(rng, 5);
    const std::string text = render(*tree, rng);
    const auto expected = eval(*tree);
    const auto got = evaluate_expression(text);
    if (!expected) {
      EXPECT_TRUE(std::holds_alternative<EvalError>(got)) << text;
      continue;
    }
    ASSERT_TRUE(std::holds_alternative<double>(got)) << text << ": " << std::get<EvalError>(got).message;
    EXPECT_NEAR(std::get<double>(got), *expected, 1e-9 * std::max(1.0, std::abs(*expected))) << text;
    ++evaluated;
  }
  EXPECT_GT(evaluated, 1000);
}
