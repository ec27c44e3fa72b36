#include <random>
#include <set>

#include <gtest/gtest.h>

#include "padic/cosets.hpp"
#include "test_support.hpp"

using namespace padic;
using padic::testing::expect_errc;

namespace {

long lpow(long p, int e) {
  long r = 1;
  while (e-- > 0) r *= p;
  return r;
}

// n-th powers of units mod p^k by exhaustive search.
std::set<long> unit_powers(long p, int n, int k) {
  const long mod = lpow(p, k);
  std::set<long> out;
  for (long y = 1; y < mod; ++y) {
    if (y % p == 0) continue;
    long r = 1;
    for (int i = 0; i < n; ++i) r = r * y % mod;
    out.insert(r);
  }
  return out;
}

int v_of(long x, long p) {
  int v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

std::vector<long> rep_values(const CosetTable& t) {
  std::vector<long> out;
  for (const auto& r : t.representatives()) out.push_back(r.value.get_si());
  return out;
}

PadicNumber z(long a, long p, int n = 10) { return PadicNumber::from_rational(a, 1, p, n); }

}  // namespace

TEST(Hensel, Examples) {
  const auto one = hensel_lift(Polynomial::from_integers({-1, 0, 1}, 7, 12), z(1, 7), 8);
  EXPECT_TRUE(one.agrees_mod(z(1, 7), 8));

  const auto f = Polynomial::from_integers({-2, 0, 1}, 7, 12);
  const auto r = hensel_lift(f, z(3, 7), 5);
  EXPECT_EQ(r.residue(5), 4567);  // the square root of 2 mod 7^5 that is 3 mod 7
  const auto ds = r.digits();
  EXPECT_EQ(std::vector<long>(ds.begin(), ds.begin() + 5), (std::vector<long>{3, 1, 2, 6, 1}));
  const auto fr = f(r);
  EXPECT_TRUE(fr.is_zero() || fr.val() >= 5);

  expect_errc(Errc::HenselConditionFailed,
              [] { (void)hensel_lift(Polynomial::from_integers({-2, 0, 1}, 5, 10), z(1, 5), 4); });
}

TEST(Hensel, AgreesWithExhaustiveRootSearch) {
  for (long p : {3L, 5L, 7L}) {
    const int k = 4;
    const long mod = lpow(p, k);
    for (long c = 1; c < p * p; ++c) {
      if (c % p == 0) continue;
      const auto f = Polynomial::from_integers({-c, 0, 1}, p, 12);
      for (long x0 = 1; x0 < p; ++x0) {
        if ((x0 * x0 - c) % p != 0) continue;
        const auto root = hensel_lift(f, z(x0, p), k);
        std::vector<long> brute;
        for (long y = x0; y < mod; y += p) {
          if ((y * y - c) % mod == 0) brute.push_back(y);
        }
        ASSERT_EQ(brute.size(), 1u);
        EXPECT_EQ(root.residue(k), brute.front()) << "p=" << p << " c=" << c;
      }
    }
  }
}

TEST(Hensel, ExponentExamples) {
  EXPECT_EQ(hensel_exponent(3, 2), 1);
  EXPECT_EQ(hensel_exponent(2, 2), 3);
  EXPECT_EQ(hensel_exponent(5, 5), 3);
  EXPECT_EQ(hensel_exponent(2, 4), 5);
  EXPECT_EQ(hensel_exponent(7, 1), 1);
}

TEST(Hensel, ExponentSubgroupByEnumeration) {
  // Every u = 1 mod p^m is an n-th power modulo p^(m+3).
  for (auto [p, n] : std::vector<std::pair<long, int>>{{3, 2}, {2, 2}, {5, 5}, {2, 4}, {3, 3}, {7, 2}, {5, 2}}) {
    const int m = hensel_exponent(p, n);
    const int k = m + 3;
    const auto powers = unit_powers(p, n, k);
    for (long u = 1; u < lpow(p, k); u += lpow(p, m)) {
      EXPECT_TRUE(powers.count(u)) << "p=" << p << " n=" << n << " u=" << u;
      EXPECT_TRUE(is_nth_power(PadicNumber::from_rational(u, 1, p, k), n));
    }
  }
}

TEST(Hensel, MinimalityObservedForSmallCases) {
  // m = 1 already suffices for odd p not dividing n; m = 3 is sharp for p = 2, n = 2.
  const auto sq3 = unit_powers(3, 2, 5);
  for (long u = 1; u < 243; u += 3) EXPECT_TRUE(sq3.count(u));
  const auto sq2 = unit_powers(2, 2, 6);
  EXPECT_FALSE(sq2.count(5));
}

TEST(Cosets, TableExamples) {
  EXPECT_EQ(rep_values(build_coset_table(5, 2)), (std::vector<long>{1, 2, 5, 10}));
  EXPECT_EQ(rep_values(build_coset_table(3, 1)), (std::vector<long>{1}));
  const auto t22 = build_coset_table(2, 2);
  EXPECT_EQ(t22.size(), 8u);
  EXPECT_EQ(rep_values(t22), (std::vector<long>{1, 3, 5, 7, 2, 6, 10, 14}));
  EXPECT_EQ(build_coset_table(3, 3).size(), 9u);
  expect_errc(Errc::BudgetExceeded, [] { (void)build_coset_table(101, 101, 1000); });
}

TEST(Cosets, ClassifyExamples) {
  const auto t = build_coset_table(5, 2);
  EXPECT_EQ(classify(z(4, 5), t).representative().value, 1);
  EXPECT_EQ(classify(z(45, 5), t).representative().value, 5);
  EXPECT_EQ(classify(z(2, 5), t).representative().value, 2);
  EXPECT_EQ(classify(PadicNumber::from_rational(2, 25, 5, 4), t).representative().value, 2);
  expect_errc(Errc::InsufficientPrecision, [&] { (void)classify(PadicNumber::zero(5, 4), t); });
  const auto t2 = build_coset_table(2, 2);
  expect_errc(Errc::InsufficientPrecision, [&] { (void)classify(PadicNumber::from_rational(3, 1, 2, 2), t2); });
}

TEST(Cosets, NthPowerExamples) {
  EXPECT_TRUE(is_nth_power(z(8, 7), 3));
  EXPECT_FALSE(is_nth_power(z(5, 5), 2));
  EXPECT_TRUE(is_nth_power(z(7, 3), 2));
  EXPECT_FALSE(is_nth_power(z(2, 5), 2));
  EXPECT_TRUE(is_nth_power(PadicNumber::from_rational(1, 9, 3, 6), 2));
  EXPECT_FALSE(is_nth_power(z(5, 2), 2));  // 5 = 5 mod 8
  EXPECT_TRUE(is_nth_power(z(17, 2), 2));  // 17 = 1 mod 8
}

TEST(CosetsProperty, PartitionMatchesBruteForce) {
  for (auto [p, n] : std::vector<std::pair<long, int>>{{5, 2}, {3, 2}, {2, 2}, {3, 3}, {7, 3}, {2, 3}}) {
    const auto t = build_coset_table(p, n);
    const int m = t.hensel_m();
    const int k = m + n;
    const long mod = lpow(p, k);
    const auto powers = unit_powers(p, n, k);
    std::set<std::size_t> seen;
    for (long x = 1; x < mod; ++x) {
      const int v = v_of(x, p);
      if (k - v < m) continue;
      const auto label = classify(PadicNumber::from_rational(x, 1, p, k - v), t);
      seen.insert(label.index);
      // Exactly one representative lambda puts x / lambda among the n-th powers.
      int hits = 0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& rep = t.representatives()[i];
        if ((v - rep.valuation) % n != 0) continue;
        const long ux = x / lpow(p, v) % mod;
        const long ul = rep.unit.get_si();
        // ux / ul is an n-th power iff ux = ul * y^n for some unit y.
        bool ok = false;
        for (long w : powers) {
          if ((ul * w - ux) % lpow(p, m) == 0) {
            ok = true;
            break;
          }
        }
        if (ok) {
          ++hits;
          EXPECT_EQ(i, label.index) << "p=" << p << " n=" << n << " x=" << x;
        }
      }
      EXPECT_EQ(hits, 1) << "p=" << p << " n=" << n << " x=" << x;
    }
    EXPECT_EQ(seen.size(), t.size());
  }
}

TEST(CosetsProperty, StableUnderPowers) {
  std::mt19937_64 rng(3);
  for (auto [p, n] : std::vector<std::pair<long, int>>{{5, 2}, {2, 2}, {3, 3}, {7, 2}}) {
    const auto t = build_coset_table(p, n);
    std::uniform_int_distribution<long> d(1, 5000);
    for (int i = 0; i < 300; ++i) {
      const auto x = z(d(rng), p, 12);
      const auto y = z(d(rng), p, 12);
      const auto tpow = y.pow(n);
      ASSERT_TRUE(is_nth_power(tpow, n));
      EXPECT_EQ(classify(x * tpow, t).index, classify(x, t).index);
    }
  }
}

TEST(Cosets, Json) {
  const auto j = to_json(build_coset_table(5, 2));
  EXPECT_EQ(j["prime"], 5);
  EXPECT_EQ(j["n"], 2);
  EXPECT_EQ(j["hensel_m"], 1);
  EXPECT_EQ(j["representatives"], nlohmann::json::parse("[1,2,5,10]"));
}
