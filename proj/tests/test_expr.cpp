#include "mfldp/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using mfldp::ParseContext;
using mfldp::ParseError;
using mfldp::RateExpr;

namespace {

double eval_at(const std::string& src, std::vector<double> x, const ParseContext& ctx = {}) {
  return RateExpr::parse(src, ctx).eval(x);
}

// Random expression text built from the grammar, used for round-trip checks.
std::string random_expr(std::mt19937_64& g, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 11 : 2);
  std::uniform_real_distribution<double> num(0.0, 10.0);
  auto sub = [&] { return random_expr(g, depth - 1); };
  switch (pick(g)) {
    case 0: return std::to_string(num(g));
    case 1: return "x" + std::to_string(1 + g() % 3);
    case 2: return "beta";
    case 3: return "(" + sub() + " + " + sub() + ")";
    case 4: return sub() + " - " + sub();
    case 5: return sub() + "*" + sub();
    case 6: return "(" + sub() + ")/" + sub();
    case 7: return "-" + sub();
    case 8: return "min(" + sub() + "," + sub() + ")";
    case 9: return "max(" + sub() + "," + sub() + ")";
    case 10: return "exp(" + sub() + ")";
    default: return "cond(" + sub() + (g() % 2 ? " <= " : " != ") + sub() + ", " + sub() + ", abs(" + sub() + "))";
  }
}

}  // namespace

TEST(RateExpr, ArithmeticOnSimplexPoint) {
  EXPECT_DOUBLE_EQ(eval_at("x1 * 2.0", {0.3, 0.7}), 0.6);
  EXPECT_NEAR(eval_at("exp(-2.0*(x2-x1))", {0.3, 0.7}), 0.44932896411722156, 1e-15);
  EXPECT_DOUBLE_EQ(eval_at("1 + 2 * 3 - 4 / 2", {0.0, 1.0}), 5.0);
  EXPECT_DOUBLE_EQ(eval_at("-x1 - -x2", {0.25, 0.75}), 0.5);
  EXPECT_DOUBLE_EQ(eval_at("min(x1, x2) + max(x1, x2)", {0.25, 0.75}), 1.0);
  EXPECT_DOUBLE_EQ(eval_at("abs(x1 - x2)", {0.25, 0.75}), 0.5);
  EXPECT_DOUBLE_EQ(eval_at("2.5e-1 + .75", {0.0, 1.0}), 1.0);
}

TEST(RateExpr, Conditional) {
  EXPECT_DOUBLE_EQ(eval_at("cond(x1 < x2, 1, 2)", {0.3, 0.7}), 1.0);
  EXPECT_DOUBLE_EQ(eval_at("cond(x1 >= x2, 1, 2)", {0.3, 0.7}), 2.0);
  EXPECT_DOUBLE_EQ(eval_at("cond(x1 == x2, 1, 2)", {0.5, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(eval_at("cond(x1 != x2, 1, 2)", {0.5, 0.5}), 2.0);
  EXPECT_DOUBLE_EQ(eval_at("cond(x1 <= 0.5, 1, 2)", {0.5, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(eval_at("cond(x1 > 0.5, 1, 2)", {0.5, 0.5}), 2.0);
}

TEST(RateExpr, Params) {
  ParseContext ctx;
  ctx.params["beta"] = 1.5;
  EXPECT_DOUBLE_EQ(eval_at("beta * x1", {0.2, 0.8}, ctx), 0.3);
  EXPECT_EQ(RateExpr::parse("beta * x1", ctx).to_string(), "(beta * x1)");
}

TEST(RateExpr, GuardedEvaluationReturnsNonFinite) {
  EXPECT_TRUE(std::isinf(eval_at("log(x1)", {0.0, 1.0})));
  EXPECT_TRUE(std::isnan(eval_at("log(x1 - 1)", {0.0, 1.0})));
  EXPECT_TRUE(std::isinf(eval_at("1 / x1", {0.0, 1.0})));
  EXPECT_TRUE(std::isnan(eval_at("x1 / x1", {0.0, 1.0})));
  EXPECT_TRUE(std::isnan(eval_at("min(x1 / x1, 2)", {0.0, 1.0})));
}

TEST(RateExpr, SyntaxErrorCarriesOffset) {
  try {
    RateExpr::parse("x1 +");
    FAIL() << "expected a syntax error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::Syntax);
    EXPECT_EQ(e.offset(), 4u);
  }
  try {
    RateExpr::parse("(x1 * 2");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
  try {
    RateExpr::parse("x1 ) 2");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
  EXPECT_THROW(RateExpr::parse(""), ParseError);
  EXPECT_THROW(RateExpr::parse("   "), ParseError);
  EXPECT_THROW(RateExpr::parse("1e"), ParseError);
  EXPECT_THROW(RateExpr::parse("cond(x1, 1, 2)"), ParseError);
}

TEST(RateExpr, UnknownIdentifier) {
  ParseContext ctx;
  ctx.dim = 2;
  try {
    RateExpr::parse("x1 + y", ctx);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::UnknownIdentifier);
    EXPECT_EQ(e.offset(), 5u);
  }
  EXPECT_THROW(RateExpr::parse("x3", ctx), ParseError);
  EXPECT_THROW(RateExpr::parse("x0", ctx), ParseError);
  EXPECT_THROW(RateExpr::parse("sqrt(x1)", ctx), ParseError);
  EXPECT_NO_THROW(RateExpr::parse("x2", ctx));
}

TEST(RateExpr, ArityMismatch) {
  for (const char* src : {"exp(x1, x2)", "min(x1)", "max(1,2,3)", "log()", "cond(x1 < 1, 2)", "cond(x1<1,2,3,4)"}) {
    try {
      RateExpr::parse(src);
      ADD_FAILURE() << src;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), ParseError::Kind::Arity) << src;
    }
  }
}

TEST(RateExpr, CanonicalPrinterRoundTrips) {
  ParseContext ctx;
  ctx.params["beta"] = 0.75;
  std::mt19937_64 g(7);
  const std::vector<double> x{0.2, 0.3, 0.5};
  for (int trial = 0; trial < 500; ++trial) {
    const std::string src = random_expr(g, 4);
    const RateExpr e = RateExpr::parse(src, ctx);
    const std::string printed = e.to_string();
    const RateExpr back = RateExpr::parse(printed, ctx);
    EXPECT_TRUE(e == back) << src << " -> " << printed;
    EXPECT_EQ(back.to_string(), printed);
    const double a = e.eval(x), b = back.eval(x);
    if (std::isnan(a)) EXPECT_TRUE(std::isnan(b));
    else EXPECT_EQ(a, b) << src;
  }
}

TEST(RateExpr, StructuralEquality) {
  EXPECT_TRUE(RateExpr::parse("x1+2") == RateExpr::parse("(x1 + 2.0)"));
  EXPECT_FALSE(RateExpr::parse("x1+2") == RateExpr::parse("2+x1"));
  EXPECT_FALSE(RateExpr::parse("cond(x1<1,2,3)") == RateExpr::parse("cond(x1<=1,2,3)"));
  EXPECT_EQ(RateExpr::parse("x3 * x1").max_variable(), 3);
  EXPECT_EQ(RateExpr::parse("2").max_variable(), 0);
}
