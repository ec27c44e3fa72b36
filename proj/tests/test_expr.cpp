#include <random>

#include <gtest/gtest.h>

#include "padic/expr.hpp"
#include "test_support.hpp"

using namespace padic;
using padic::testing::expect_errc;

namespace {

PadicNumber z(long a, long p, int n = 8) { return PadicNumber::from_rational(a, 1, p, n); }

mpq_class ev(const std::string& f, long x, long p) { return eval_exact(parse_expr(f), x, p).value.representative(); }

}  // namespace

TEST(Eval, Examples) {
  EXPECT_EQ(eval(parse_expr("x^2 + 1"), z(3, 5)).representative(), 10);
  const PadicNumber s = eval(parse_expr("spread2(x)"), z(4, 3));
  EXPECT_EQ(s.representative(), 10);
  EXPECT_EQ(s.absolute_precision(), 16);
  EXPECT_EQ(eval(parse_expr("cases{coset(2,1): x; else: 2*x}"), z(2, 5)).representative(), 4);
  EXPECT_EQ(eval(parse_expr("cases{coset(2,1): x; else: 2*x}"), z(4, 5)).representative(), 4);
  expect_errc(Errc::DivisionByZero, [] { (void)eval(parse_expr("1/x"), PadicNumber::from_rational(0, 1, 5, 8)); });
  expect_errc(Errc::DivisionByZero, [] { (void)eval_exact(parse_expr("x^-1"), 0, 5); });
}

TEST(Eval, ExactRationalArithmetic) {
  const auto r = eval_exact(parse_expr("(x^3 - 2) / (x + 1/2)"), 3, 7);
  ASSERT_TRUE(r.exact.has_value());
  EXPECT_EQ(*r.exact, mpq_class(50, 7));
  EXPECT_EQ(r.value.val(), -1);
  EXPECT_EQ(ev("compose(x^2, x + 1)", 2, 5), 9);
}

TEST(Eval, DigitSpreadDigits) {
  // 1 + 2*3 + 1*9 = 16 maps to 1 + 2*9 + 1*81 = 100.
  EXPECT_EQ(ev("spread2(x)", 16, 3), 100);
  EXPECT_EQ(ev("spread3(x)", 3, 2), 0 + 8 * 1 + 64 * 0 + 1);  // 3 = 1 + 2
  // Negative inputs go through the p-adic expansion: -1 = sum 2*3^i.
  const PadicNumber m = eval(parse_expr("spread2(x)"), z(-1, 3, 3));
  EXPECT_EQ(m.absolute_precision(), 6);
  EXPECT_EQ(m.representative(), 2 + 2 * 9 + 2 * 81);
  EXPECT_EQ(eval(parse_expr("spread2(x)"), PadicNumber::from_rational(1, 3, 3, 2)).representative(), mpq_class(1, 9));
}

TEST(Eval, PrecisionIsReported) {
  // Cancellation leaves exactly the justified digits.
  const PadicNumber d = eval(parse_expr("x - 1"), z(1 + 125, 5, 4));
  EXPECT_EQ(d.val(), 3);
  EXPECT_EQ(d.absolute_precision(), 4);
  // Constants never limit the precision of the input.
  const PadicNumber c = eval(parse_expr("x + 1/3"), PadicNumber::from_rational(1, 1, 5, 20));
  EXPECT_EQ(c.absolute_precision(), 20);
}

TEST(Eval, Guards) {
  const auto f = parse_expr("cases{ball(0, 2): 1; val(0 mod 2): x; else: 2*x}");
  EXPECT_EQ(ev("cases{ball(0, 2): 1; val(0 mod 2): x; else: 2*x}", 50, 5), 1);
  EXPECT_EQ(eval_exact(f, 3, 5).value.representative(), 3);
  EXPECT_EQ(eval_exact(f, 5, 5).value.representative(), 10);
  EXPECT_EQ(eval_exact(f, 0, 5).value.representative(), 1);
  // Input 5 + O(5^2) might lie in ball(0,2)? No: it is 5 mod 25, so the ball guard is false.
  EXPECT_EQ(eval(f, PadicNumber::from_rational(5, 1, 5, 1)).representative(), 10);
  // Zero mod 5 could be in either of the first two regions, whose values differ.
  expect_errc(Errc::GuardUndecidableAtPrecision, [&] { (void)eval(f, PadicNumber::zero(5, 1)); });
  // Undecided guards are harmless when the branches agree.
  const PadicNumber o = eval(parse_expr("cases{coset(2,1): x; else: 2*x}"), PadicNumber::zero(5, 3));
  EXPECT_TRUE(o.is_zero());
  EXPECT_EQ(o.absolute_precision(), 3);
  expect_errc(Errc::OutOfDomain, [] { (void)eval_exact(parse_expr("cases{val(0): x}"), 5, 5); });
}

TEST(Eval, DecideTriState) {
  const Guard coset = CosetIs{2, 2};
  EXPECT_EQ(decide(coset, z(3, 5)), Decision::True);
  EXPECT_EQ(decide(coset, z(4, 5)), Decision::False);
  EXPECT_EQ(decide(coset, z(10, 5)), Decision::False);
  EXPECT_EQ(decide(coset, PadicNumber::zero(5, 6)), Decision::Unknown);
  const Guard vals = ValuationIn{{0, 1}, 0, 0};
  EXPECT_EQ(decide(vals, PadicNumber::zero(5, 2)), Decision::False);
  EXPECT_EQ(decide(vals, PadicNumber::zero(5, 1)), Decision::Unknown);
  const Guard ball = InBall{mpq_class(1), 3};
  EXPECT_EQ(decide(ball, z(26, 5, 2)), Decision::Unknown);
  EXPECT_EQ(decide(ball, z(2, 5, 2)), Decision::False);
  EXPECT_EQ(decide(ball, z(126, 5, 4)), Decision::True);
  // p = 2 needs three unit digits for squares.
  EXPECT_EQ(decide(CosetIs{2, 1}, PadicNumber::from_rational(17, 1, 2, 2)), Decision::Unknown);
  EXPECT_EQ(decide(CosetIs{2, 1}, PadicNumber::from_rational(17, 1, 2, 3)), Decision::True);
}

TEST(Eval, NthRootBranch) {
  EXPECT_EQ(ev("root2[1](x)", 16, 5), mpq_class(PadicNumber::from_rational(-4, 1, 5, 8).representative()));
  EXPECT_EQ(ev("root2[4](x)", 16, 5), 4);
  EXPECT_EQ(ev("root3[2](x)", 8 * 343, 7), 14);
  expect_errc(Errc::OutOfDomain, [] { (void)ev("root2[1](x)", 4, 5); });
  expect_errc(Errc::OutOfDomain, [] { (void)ev("root2[1](x)", 5, 5); });
  expect_errc(Errc::OutOfDomain, [] { (void)ev("root2[1](x)", 0, 5); });
  // p = 2: the selector is read modulo 8 and the root must keep it.
  EXPECT_EQ(ev("root2[1](x)", 1, 2), 1);
  EXPECT_EQ(ev("root2[7](x)", 1, 2), mpq_class(PadicNumber::from_rational(-1, 1, 2, 8).residue(7)));
  const PadicNumber r = eval_exact(parse_expr("root2[3](x)"), 2, 7, {10}).value;
  EXPECT_EQ(r.relative_precision(), 10);
  EXPECT_TRUE((r * r).agrees_mod(z(2, 7, 10), 10));
}

TEST(Derivative, Examples) {
  EXPECT_EQ(to_string(symbolic_derivative(parse_expr("x^2"))), "2 * x");
  EXPECT_EQ(to_string(symbolic_derivative(parse_expr("1/x"))), "(-1) / x^2");
  EXPECT_EQ(to_string(symbolic_derivative(parse_expr("3*x + 1"))), "3");
  EXPECT_EQ(to_string(symbolic_derivative(parse_expr("cases{coset(2,1): x^3; else: x}"))),
            "cases{coset(2, 1): 3 * x^2; else: 1}");
  expect_errc(Errc::UnsupportedExpression, [] { (void)symbolic_derivative(parse_expr("spread2(x) + x")); });
  EXPECT_FALSE(is_differentiable_fragment(parse_expr("x + spread2(x)")));
  EXPECT_TRUE(is_differentiable_fragment(parse_expr("root2[1](1 + x)")));
}

TEST(Derivative, RootAgainstFiniteDifferences) {
  // d/dx sqrt(1 + x) = 1 / (2 sqrt(1 + x)); compare with (f(a + h) - f(a)) / h at h = 5^8.
  const auto f = parse_expr("root2[1](1 + x)");
  const auto df = symbolic_derivative(f);
  const long p = 5;
  const EvalOptions opts{30};
  for (long a : {0L, 5L, 10L, 35L, 3L * 25}) {
    const mpq_class h(ipow(p, 8));
    const PadicNumber fa = eval_exact(f, a, p, opts).value;
    const PadicNumber fb = eval_exact(f, a + h, p, opts).value;
    const PadicNumber q = (fb - fa) / PadicNumber::from_rational(h, p, 30);
    const PadicNumber d = eval_exact(df, a, p, opts).value;
    EXPECT_TRUE(q.agrees_mod(d, 6)) << a;
    EXPECT_TRUE(d.agrees_mod(eval_exact(parse_expr("1/(2*root2[1](1+x))"), a, p, opts).value, 20));
  }
}

TEST(Image, Examples) {
  EXPECT_EQ(image_residues(parse_expr("x"), Ball::integers(3), 2, 2).size(), 9u);

  std::set<mpq_class> squares;
  for (long x = 1; x < 125; x += 5) squares.insert(mpq_class(x * x % 125));
  const auto sq = image_residues(parse_expr("x^2"), Ball(5, 1, 1), 3, 3);
  EXPECT_EQ(sq, squares);
  EXPECT_EQ(sq.size(), 25u);
  for (const auto& r : sq) EXPECT_EQ(r.get_num() % 5, 1);

  std::set<mpq_class> spread;
  for (long a0 = 0; a0 < 3; ++a0) {
    for (long a1 = 0; a1 < 3; ++a1) spread.insert(mpq_class(a0 + 9 * a1));
  }
  EXPECT_EQ(image_residues(parse_expr("spread2(x)"), Ball::integers(3), 2, 4), spread);

  expect_errc(Errc::PrecisionInsufficientForImage,
              [] { (void)image_residues(parse_expr("spread2(x)"), Ball::integers(3), 2, 5); });
  expect_errc(Errc::BudgetExceeded, [] { (void)image_residues(parse_expr("x"), Ball::integers(7), 9, 9, 1000); });
}

TEST(ExprProperty, EvaluationHomomorphism) {
  const std::vector<std::string> fs = {"x^2 + 1", "x^3 - 2*x", "1/(x + 1)", "spread2(x)", "7*x - 1/5"};
  std::mt19937_64 rng(41);
  for (long p : {3L, 5L, 7L}) {
    std::uniform_int_distribution<long> d(1, 3000);
    for (int i = 0; i < 100; ++i) {
      const PadicNumber x = z(d(rng), p, 10);
      for (const auto& a : fs) {
        for (const auto& b : fs) {
          const auto fa = parse_expr(a), fb = parse_expr(b);
          const PadicNumber va = eval(fa, x), vb = eval(fb, x);
          const PadicNumber sum = eval(fa + fb, x), prod = eval(fa * fb, x);
          EXPECT_TRUE(sum.agrees_mod(va + vb, (va + vb).absolute_precision()));
          EXPECT_EQ(sum.absolute_precision(), (va + vb).absolute_precision());
          EXPECT_TRUE(prod.agrees_mod(va * vb, (va * vb).absolute_precision()));
          const PadicNumber comp = eval(FuncExpr::compose(fa, fb), x);
          EXPECT_TRUE(comp.agrees_mod(eval(fa, vb), comp.absolute_precision()));
        }
      }
    }
  }
}

TEST(ExprProperty, DigitSpreadScalesValuations) {
  for (long p : {2L, 3L, 5L}) {
    for (int dd : {2, 3}) {
      const auto g = FuncExpr::digit_spread(dd);
      const int k = p == 5 ? 3 : 4;
      const auto pts = enumerate_ball(Ball::integers(p), k);
      std::vector<PadicNumber> vals;
      for (const auto& x : pts) vals.push_back(eval_exact(g, x.representative(), p, {dd * k + 2}).value);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
          const int v = (pts[i] - pts[j]).val();
          EXPECT_EQ((vals[i] - vals[j]).val(), dd * v);
        }
      }
    }
  }
}

TEST(ExprProperty, GuardPartition) {
  const auto f = parse_expr("cases{ball(0,2): 0; coset(2,1): 1; coset(2,2): 2; coset(2,5): 3; coset(2,10): 4}");
  const auto& cases = f.node().cases;
  for (const auto& x : enumerate_ball(Ball::integers(5), 4)) {
    const mpq_class q = x.representative();
    int fired = 0;
    for (const auto& c : cases) fired += decide_exact(c.guard, q, 5) ? 1 : 0;
    if (q != 0 && q.get_num() % 25 == 0) {
      EXPECT_EQ(fired, 2);  // the ball and the coset of x both hold
    } else {
      EXPECT_EQ(fired, 1) << q;
    }
  }
}

TEST(Syntax, RoundTrip) {
  const std::vector<std::string> corpus = {
      "x^2 + 1",
      "(x - 1) * (x + 1) / (x^2 - 3)",
      "x^-1",
      "-x^2 + 1/3",
      "spread2(x)",
      "spread3(x + 1)",
      "root2[1](1 + x)",
      "compose(x^2, spread2(x))",
      "cases{coset(2,1): x; else: 2*x}",
      "cases{ball(0,40): 0; coset(2,1): x; val(0 mod 2): x^(-1); val(1, 3, -2): 7; else: (-2/5)*x}",
      "x - (x - 1)",
      "x / (x / 2)",
      "(x^2)^3",
  };
  for (const auto& s : corpus) {
    const FuncExpr f = parse_expr(s);
    const std::string printed = to_string(f);
    EXPECT_EQ(parse_expr(printed), f) << s << " -> " << printed;
    EXPECT_EQ(expr_from_json(to_json(f)), f) << s;
    EXPECT_EQ(expr_from_json(nlohmann::json::parse(to_json(f).dump())), f) << s;
  }
  EXPECT_EQ(to_string(parse_expr("x - (x - 1)")), "x - (x - 1)");
  EXPECT_EQ(to_string(parse_expr("-x^2 + 1/3")), "(-1) * x^2 + (1/3)");
}

TEST(Syntax, JsonTags) {
  const auto j = to_json(parse_expr("cases{coset(2,1): x^2; else: spread2(x)}"));
  EXPECT_EQ(j.dump(),
            R"({"Piecewise":[{"expr":{"IntPow":{"base":{"Var":{}},"exp":2}},"guard":{"CosetIs":{"lambda":1,"n":2}}},)"
            R"({"expr":{"DigitSpread":{"d":2}},"guard":{"Otherwise":{}}}]})");
  const auto f = expr_from_json(nlohmann::json::parse(
      R"({"Add":[{"Mul":[{"RationalConst":{"a":3,"b":1}},{"Var":{}}]},{"RationalConst":{"a":1,"b":2}}]})"));
  EXPECT_EQ(to_string(f), "3 * x + (1/2)");
  EXPECT_EQ(to_string(expr_from_json(nlohmann::json::parse(R"({"NthRootBranch":{"n":2,"branch":1}})"))), "root2[1](x)");
}

TEST(Syntax, Errors) {
  for (const char* bad : {"x +", "x^", "2 $ x", "spread(x)", "cases{}", "cases{coset(2): x}", "y", "(x", "x)",
                          "root2(x)", "val(1): x"}) {
    expect_errc(Errc::ParseError, [&] { (void)parse_expr(bad); });
  }
  expect_errc(Errc::InvalidArgument, [] { (void)parse_expr("spread1(x)"); });
  expect_errc(Errc::InvalidArgument, [] { (void)parse_expr("cases{coset(2,0): x}"); });
  expect_errc(Errc::ParseError, [] { (void)expr_from_json(nlohmann::json::parse(R"({"Foo":1})")); });
  expect_errc(Errc::ParseError, [] { (void)expr_from_json(nlohmann::json::parse(R"({"Add":[{"Var":{}}]})")); });
}
