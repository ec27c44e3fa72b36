#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "padic/number.hpp"

namespace padic {

/// Closed valuation ball {x : v(x - center) >= radius_val}.
///
/// The center is stored reduced modulo p^radius_val, so two balls compare
/// equal exactly when they are the same set. An open ball
/// {|x - c| < p^-k} is the closed ball with radius_val = k + 1.
class Ball {
 public:
  Ball(const PadicNumber& center, int radius_val);
  Ball(long p, const mpq_class& center, int radius_val);
  static Ball from_open(const PadicNumber& center, int open_exponent) { return Ball(center, open_exponent + 1); }
  // Z_p itself.
  static Ball integers(long p) { return Ball(p, mpq_class(0), 0); }

  long prime() const { return center_.prime(); }
  const PadicNumber& center() const { return center_; }
  // Canonical representative of the center (digits below radius only).
  mpq_class center_residue() const { return center_.residue(radius_); }
  int radius_val() const { return radius_; }

  // Throws IndistinguishableAtPrecision if x is not known finely enough.
  bool contains(const PadicNumber& x) const;
  bool contains(const Ball& other) const;
  bool disjoint(const Ball& other) const;
  // The p sub-balls of radius radius_val + 1, in residue order.
  std::vector<Ball> children() const;

  friend bool operator==(const Ball& a, const Ball& b);

  // "c:r" with c rendered as a rational.
  std::string to_string() const;

 private:
  PadicNumber center_;
  int radius_;
};

// "c:r" where c is a rational and r an integer.
Ball parse_ball(const std::string& text, long p);

enum class BallRelation { Disjoint, Equal, FirstInsideSecond, SecondInsideFirst };
BallRelation relation(const Ball& a, const Ball& b);

/// True iff z lies in the smallest ball containing x and y.
bool between(const PadicNumber& z, const PadicNumber& x, const PadicNumber& y);

/// Ball(center = x, radius_val = v(x - y)).
Ball smallest_ball_containing(const PadicNumber& x, const PadicNumber& y);

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

/// The p^(k - r) residue classes of B modulo p^k, each as a value known
/// modulo p^k, ordered by the digits above the radius.
std::vector<PadicNumber> enumerate_ball(const Ball& b, int k, std::size_t cap = kDefaultEnumerationCap);

/// Number of residues enumerate_ball would produce (saturating).
std::size_t ball_residue_count(const Ball& b, int k);

}  // namespace padic
