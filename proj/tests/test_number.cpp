#include <random>

#include <gtest/gtest.h>

#include "padic/ball.hpp"
#include "padic/number.hpp"
#include "test_support.hpp"

using namespace padic;
using padic::testing::expect_errc;

namespace {

PadicNumber q(long a, long b, long p, int n = 8) { return PadicNumber::from_rational(a, b, p, n); }

}  // namespace

TEST(Valuation, IntegersAndRationals) {
  EXPECT_EQ(val(q(18, 1, 3)), Valuation(2));
  EXPECT_TRUE(val(q(0, 1, 5)).is_infinite());
  EXPECT_EQ(val(q(7, 25, 5)), Valuation(-2));
  EXPECT_LT(Valuation(100), Valuation::infinity());
  expect_errc(Errc::PrecisionExhausted, [] { (void)q(0, 1, 5).val(); });
}

TEST(Arithmetic, SmallExamples) {
  const PadicNumber five = q(2, 1, 5) + q(3, 1, 5);
  EXPECT_EQ(five.val(), 1);
  EXPECT_EQ(five.representative(), 5);

  const PadicNumber sq = q(4, 1, 3) * q(4, 1, 3);
  EXPECT_EQ(sq.val(), 0);
  EXPECT_EQ(sq.representative(), 16);
  EXPECT_EQ(sq.digits(), (std::vector<long>{1, 2, 1, 0, 0, 0, 0, 0}));

  const PadicNumber geo = q(1, 1, 7) / q(-6, 1, 7);
  EXPECT_EQ(geo.val(), 0);
  for (long d : geo.digits()) EXPECT_EQ(d, 1);
  // (1 - 7) * sum 7^i == 1 mod 7^8
  EXPECT_TRUE((q(-6, 1, 7) * geo).agrees_mod(q(1, 1, 7), 8));
}

TEST(Arithmetic, FromRational) {
  const PadicNumber one = PadicNumber::from_rational(1, 1, 5, 4);
  EXPECT_EQ(one.val(), 0);
  EXPECT_EQ(one.unit(), 1);
  const PadicNumber ten = PadicNumber::from_rational(10, 1, 5, 4);
  EXPECT_EQ(ten.val(), 1);
  EXPECT_EQ(ten.unit(), 2);
  const PadicNumber third = PadicNumber::from_rational(1, 3, 5, 3);
  EXPECT_EQ(third.val(), 0);
  EXPECT_EQ(third.unit(), 42);
  expect_errc(Errc::DivisionByZero, [] { (void)PadicNumber::from_rational(1, 0, 5, 3); });
  expect_errc(Errc::InvalidArgument, [] { (void)PadicNumber::from_rational(1, 1, 6, 3); });
}

TEST(Arithmetic, PrecisionTracking) {
  // (1 + 5^3) - 1 keeps exactly the digits justified by the operands.
  const PadicNumber a = q(126, 1, 5, 6);  // known mod 5^6
  const PadicNumber b = q(1, 1, 5, 4);    // known mod 5^4
  const PadicNumber d = a - b;
  EXPECT_EQ(d.val(), 3);
  EXPECT_EQ(d.absolute_precision(), 4);
  EXPECT_EQ(d.relative_precision(), 1);

  // Total cancellation leaves a zero known only modulo the common precision.
  const PadicNumber z = q(7, 1, 5, 3) - q(7, 1, 5, 5);
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.absolute_precision(), 3);
  expect_errc(Errc::DivisionByZero, [&] { (void)(q(1, 1, 5) / z); });
  expect_errc(Errc::PrecisionExhausted, [&] { (void)z.residue(4); });

  // Products keep the smaller relative precision; valuations add.
  const PadicNumber m = q(25, 1, 5, 3) * q(3, 5, 5, 6);
  EXPECT_EQ(m.val(), 1);
  EXPECT_EQ(m.relative_precision(), 3);
}

TEST(Arithmetic, CanonicalText) {
  const PadicNumber ten = PadicNumber::from_rational(10, 1, 5, 4);
  EXPECT_EQ(ten.to_string(), "5^1 * (2 + 0*5 + 0*5^2 + 0*5^3) + O(5^5)");
  EXPECT_EQ(PadicNumber::parse(ten.to_string()), ten);
  EXPECT_EQ(PadicNumber::zero(3, 4).to_string(), "O(3^4)");
  EXPECT_EQ(PadicNumber::from_rational(7, 25, 5, 1).to_string(), "5^-2 * (2) + O(5^-1)");
  EXPECT_EQ(ten.to_short_string(), "10 + O(5^5)");
  expect_errc(Errc::ParseError, [] { (void)PadicNumber::parse("5^1 * (2 + 0*5) + O(5^4)"); });
  expect_errc(Errc::ParseError, [] { (void)PadicNumber::parse("5^0 * (0 + 1*5) + O(5^2)"); });
  expect_errc(Errc::ParseError, [] { (void)PadicNumber::parse("5^0 * (7) + O(5^1)"); });
  expect_errc(Errc::ParseError, [] { (void)PadicNumber::parse("5^0 *(1) + O(5^1)"); });
}

TEST(ArithmeticProperty, TextRoundTrip) {
  std::mt19937_64 rng(11);
  for (long p : {2L, 3L, 5L, 7L, 11L}) {
    for (int i = 0; i < 200; ++i) {
      std::uniform_int_distribution<long> num(-100000, 100000);
      std::uniform_int_distribution<long> den(1, 5000);
      std::uniform_int_distribution<int> prec(1, 12);
      const long a = num(rng);
      const PadicNumber x = PadicNumber::from_rational(a, den(rng), p, prec(rng));
      const std::string s = x.to_string();
      EXPECT_EQ(PadicNumber::parse(s), x) << s;
      EXPECT_EQ(PadicNumber::parse(s).to_string(), s);
    }
  }
}

TEST(ArithmeticProperty, UltrametricInequality) {
  std::mt19937_64 rng(5);
  for (long p : {2L, 3L, 5L, 7L}) {
    for (int i = 0; i < 500; ++i) {
      std::uniform_int_distribution<long> d(-3000, 3000);
      const PadicNumber x = q(d(rng), 1, p, 10);
      const PadicNumber y = q(d(rng), 1, p, 10);
      const PadicNumber z = q(d(rng), 1, p, 10);
      const Valuation xz = val(x - z), xy = val(x - y), yz = val(y - z);
      EXPECT_GE(xz, std::min(xy, yz));
      if (xy != yz) EXPECT_EQ(xz, std::min(xy, yz));
    }
  }
}

TEST(ArithmeticProperty, RationalRoundTrip) {
  std::mt19937_64 rng(17);
  for (long p : {2L, 3L, 5L, 7L}) {
    for (int i = 0; i < 300; ++i) {
      std::uniform_int_distribution<long> d(1, 100000);
      long a = d(rng) - 50000;
      const long b = d(rng);
      const int n = 9;
      const PadicNumber lhs = PadicNumber::from_rational(a, b, p, n) * PadicNumber::from_rational(b, 1, p, n);
      const PadicNumber rhs = PadicNumber::from_rational(a, 1, p, n);
      if (a == 0) {
        EXPECT_TRUE(lhs.is_zero());
        continue;
      }
      const int k = std::min(lhs.absolute_precision(), rhs.absolute_precision());
      EXPECT_TRUE(lhs.agrees_mod(rhs, k));
    }
  }
}

TEST(Ball, BetweenExamples) {
  const auto x = q(1, 1, 3), y = q(10, 1, 3), z = q(4, 1, 3);
  EXPECT_TRUE(between(x, x, y));
  EXPECT_FALSE(between(z, x, y));
  EXPECT_TRUE(between(y, x, z));
  expect_errc(Errc::IndistinguishableAtPrecision, [] { (void)between(q(1, 1, 3), q(2, 1, 3, 2), q(11, 1, 3, 2)); });
}

TEST(Ball, SmallestBall) {
  EXPECT_EQ(smallest_ball_containing(q(1, 1, 5), q(6, 1, 5)), Ball(5, 1, 1));
  EXPECT_EQ(smallest_ball_containing(q(1, 1, 5), q(2, 1, 5)), Ball(5, 1, 0));
  EXPECT_EQ(smallest_ball_containing(q(3, 1, 5), q(128, 1, 5)), Ball(5, 3, 3));
  EXPECT_EQ(Ball(5, 1, 0), Ball::integers(5));
  EXPECT_EQ(Ball(5, 6, 1), Ball(5, 1, 1));
  EXPECT_EQ(Ball::from_open(q(0, 1, 3), 1), Ball(3, 0, 2));
}

TEST(Ball, Enumeration) {
  auto residues = [](const Ball& b, int k) {
    std::vector<mpq_class> out;
    for (const auto& r : enumerate_ball(b, k)) out.push_back(r.representative());
    return out;
  };
  EXPECT_EQ(residues(Ball(3, 0, 0), 1), (std::vector<mpq_class>{0, 1, 2}));
  EXPECT_EQ(residues(Ball(3, 1, 1), 2), (std::vector<mpq_class>{1, 4, 7}));
  EXPECT_EQ(residues(Ball(2, 1, 2), 3), (std::vector<mpq_class>{1, 5}));
  EXPECT_EQ(enumerate_ball(Ball(3, mpq_class(1, 9), -2), 0).size(), 9u);
  expect_errc(Errc::BudgetExceeded, [] { (void)enumerate_ball(Ball::integers(7), 8, 1000); });
}

TEST(BallProperty, Dichotomy) {
  std::mt19937_64 rng(23);
  for (long p : {2L, 3L, 5L}) {
    for (int i = 0; i < 400; ++i) {
      std::uniform_int_distribution<long> c(0, 500);
      std::uniform_int_distribution<int> r(-1, 4);
      const Ball a(p, c(rng), r(rng)), b(p, c(rng), r(rng));
      const bool ab = b.contains(a), ba = a.contains(b), dj = a.disjoint(b);
      const int holds = (dj ? 1 : 0) + ((ab || ba) ? 1 : 0);
      EXPECT_EQ(holds, 1);
      // Disjoint balls share no enumerated residue.
      if (dj) {
        const int k = std::max(a.radius_val(), b.radius_val()) + 1;
        for (const auto& x : enumerate_ball(a, k)) EXPECT_FALSE(b.contains(x));
      }
    }
  }
}

TEST(BallProperty, BetweenMatchesSmallestBall) {
  std::mt19937_64 rng(29);
  for (long p : {2L, 3L, 7L}) {
    for (int i = 0; i < 500; ++i) {
      std::uniform_int_distribution<long> d(0, 2000);
      const auto x = q(d(rng), 1, p, 12), y = q(d(rng), 1, p, 12), z = q(d(rng), 1, p, 12);
      if ((x - y).is_zero()) continue;
      EXPECT_EQ(between(z, x, y), smallest_ball_containing(x, y).contains(z));
    }
  }
}
