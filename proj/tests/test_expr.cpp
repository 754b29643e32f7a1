#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gapcert/expr.hpp"

using namespace gapcert::expr;

namespace {
double eval(const char* text, std::vector<double> vars = {}) {
  return parse(text, static_cast<int>(vars.size())).evaluate(vars);
}

ParseError error_of(const char* text, int n_vars, int line = 1) {
  try {
    parse(text, n_vars, line);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for '" << text << "'";
  return ParseError("none", 0, 0);
}
}  // namespace

TEST(Expr, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(eval("1 + 2 * 3"), 7.0);
  EXPECT_DOUBLE_EQ(eval("(1 + 2) * 3"), 9.0);
  EXPECT_DOUBLE_EQ(eval("2 ^ 3 ^ 2"), 512.0);
  EXPECT_DOUBLE_EQ(eval("-2 ^ 2"), -4.0);
  EXPECT_DOUBLE_EQ(eval("2 ^ -1"), 0.5);
  EXPECT_DOUBLE_EQ(eval("8 / 4 / 2"), 1.0);
  EXPECT_DOUBLE_EQ(eval("1 - 2 - 3"), -4.0);
  EXPECT_DOUBLE_EQ(eval("1.5e2 + 2E-1"), 150.2);
}

TEST(Expr, VariablesConstantsFunctions) {
  EXPECT_DOUBLE_EQ(eval("x1 * x2 - x3", {2, 3, 4}), 2.0);
  EXPECT_DOUBLE_EQ(eval("pi"), std::numbers::pi);
  EXPECT_DOUBLE_EQ(eval("e"), std::numbers::e);
  EXPECT_NEAR(eval("sin(pi/2) + cos(0) + exp(0) + ln(e) + sqrt(4) + atan(1)"),
              6.0 + std::numbers::pi / 4, 1e-15);
}

TEST(Expr, ArccotHasRangeZeroToPi) {
  EXPECT_DOUBLE_EQ(eval("arccot(x3 - 299.2)", {0, 0, 299.2}), std::numbers::pi / 2);
  EXPECT_NEAR(arccot(1.0), std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(arccot(-1.0), 3 * std::numbers::pi / 4, 1e-15);
  double prev = arccot(-1e6);
  for (double x = -1e6; x <= 1e6; x = x < 0 ? x / 1.7 + 0.5 : (x + 0.5) * 1.7) {
    const double v = arccot(x);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, std::numbers::pi);
    ASSERT_LE(v, prev) << "x = " << x;
    prev = v;
  }
}

TEST(Expr, UnicodeMinusAccepted) {
  EXPECT_DOUBLE_EQ(eval("−1 + 3"), 2.0);
  EXPECT_DOUBLE_EQ(eval("x1 − x2", {5, 2}), 3.0);
}

TEST(Expr, MaxVariable) {
  EXPECT_EQ(parse("x1 + x3", 3).max_variable(), 3);
  EXPECT_EQ(parse("2", 3).max_variable(), 0);
}

TEST(ExprErrors, ReportLineAndColumn) {
  {
    const ParseError e = error_of("x1 + * 2", 1, 4);
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(e.column(), 6);
  }
  {
    const ParseError e = error_of("foo(x1)", 1);
    EXPECT_EQ(e.column(), 1);
    EXPECT_NE(e.message().find("foo"), std::string::npos);
  }
  {
    const ParseError e = error_of("x1 + x4", 3);
    EXPECT_EQ(e.column(), 6);
  }
  {
    const ParseError e = error_of("(x1 + 1", 1);
    EXPECT_EQ(e.column(), 8);
  }
  {
    const ParseError e = error_of("1 2", 0);
    EXPECT_EQ(e.column(), 3);
  }
  EXPECT_EQ(error_of("", 0).column(), 1);
  EXPECT_EQ(error_of("sin x1", 1).column(), 1);  // "sin" without a call is an unknown name
  const ParseError e = error_of("x1 $", 1, 2);
  const std::string what = e.what();
  EXPECT_NE(what.find("line 2"), std::string::npos) << what;
  EXPECT_NE(what.find("column 4"), std::string::npos) << what;
}

TEST(Expr, CopiesShareEvaluation) {
  const Expression a = parse("x1^2 + 1", 1);
  const Expression b = a;
  const std::vector<double> v{3.0};
  EXPECT_DOUBLE_EQ(a.evaluate(v), b.evaluate(v));
  EXPECT_EQ(b.source(), "x1^2 + 1");
}
