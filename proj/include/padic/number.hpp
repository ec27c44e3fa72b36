#pragma once

#include <compare>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "padic/errors.hpp"

namespace padic {

/// p-adic valuation: an integer, or +infinity for (approximate) zero.
class Valuation {
 public:
  constexpr Valuation() = default;  // +infinity
  constexpr explicit Valuation(int v) : value_(v) {}
  static constexpr Valuation infinity() { return Valuation(); }

  constexpr bool is_infinite() const { return !value_.has_value(); }
  constexpr bool is_finite() const { return value_.has_value(); }
  // Throws PrecisionExhausted for +infinity.
  int value() const;

  friend constexpr bool operator==(const Valuation&, const Valuation&) = default;
  friend constexpr std::strong_ordering operator<=>(const Valuation& a, const Valuation& b) {
    if (a.is_infinite() || b.is_infinite()) {
      return static_cast<int>(a.is_infinite()) <=> static_cast<int>(b.is_infinite());
    }
    return *a.value_ <=> *b.value_;
  }

  std::string to_string() const;

 private:
  std::optional<int> value_;
};

std::ostream& operator<<(std::ostream& os, const Valuation& v);

/// Power p^e as a big integer (e >= 0).
mpz_class ipow(long p, int e);

/// Exact p-adic valuation of a nonzero integer; `cap` bounds the count.
int valuation_of(const mpz_class& z, long p, int cap);

/// Element of Q_p known to finite precision.
///
/// A nonzero value is p^v * u with u a unit known modulo p^N (N is the
/// relative precision), so the value is known modulo p^(v+N). A zero value
/// only records that it is congruent to 0 modulo p^M; it never claims to be
/// exactly zero.
class PadicNumber {
 public:
  // Zero known modulo p^abs_prec.
  static PadicNumber zero(long p, int abs_prec);
  // p^v * unit, unit reduced modulo p^rel_prec. unit must be prime to p.
  static PadicNumber from_unit(long p, int v, const mpz_class& unit, int rel_prec);
  static PadicNumber from_integer(const mpz_class& a, long p, int rel_prec);
  // Image of a/b in Q_p at relative precision rel_prec. a == 0 gives zero
  // known modulo p^rel_prec.
  static PadicNumber from_rational(const mpz_class& a, const mpz_class& b, long p, int rel_prec);
  static PadicNumber from_rational(const mpq_class& q, long p, int rel_prec);
  // The residue class of q modulo p^abs_prec (q need only be p-integral
  // after scaling; digits at or above abs_prec are discarded).
  static PadicNumber from_residue(const mpq_class& q, long p, int abs_prec);

  // Canonical text "p^v * (d0 + d1*p + ...) + O(p^(v+N))" or "O(p^M)".
  static PadicNumber parse(std::string_view text);

  long prime() const { return p_; }
  bool is_zero() const { return zero_; }
  Valuation valuation() const { return zero_ ? Valuation::infinity() : Valuation(v_); }
  // Finite valuation; throws PrecisionExhausted on zero.
  int val() const;
  // x is known modulo p^absolute_precision().
  int absolute_precision() const { return zero_ ? v_ : v_ + n_; }
  // Number of known unit digits (0 for zero).
  int relative_precision() const { return zero_ ? 0 : n_; }
  const mpz_class& unit() const { return unit_; }
  // Unit digits d_0 .. d_{N-1}, least significant first.
  std::vector<long> digits() const;

  // Canonical representative of the class modulo p^k, a rational with only
  // p-power denominators. Requires k <= absolute_precision().
  mpq_class residue(int k) const;
  mpq_class representative() const { return residue(absolute_precision()); }

  // Forget digits at or above abs_prec (abs_prec <= absolute_precision()).
  PadicNumber truncated(int abs_prec) const;
  // Treat the known representative as exact and extend it with zero digits
  // up to abs_prec. Never loses information; may only add precision.
  PadicNumber padded(int abs_prec) const;
  // Representative extended to the given relative precision (zero becomes
  // zero known modulo p^(absolute_precision + rel_prec)).
  PadicNumber lifted(int rel_prec) const;

  PadicNumber operator-() const;
  friend PadicNumber operator+(const PadicNumber& a, const PadicNumber& b);
  friend PadicNumber operator-(const PadicNumber& a, const PadicNumber& b);
  friend PadicNumber operator*(const PadicNumber& a, const PadicNumber& b);
  friend PadicNumber operator/(const PadicNumber& a, const PadicNumber& b);
  PadicNumber pow(int e) const;
  PadicNumber inverse() const;

  // Structural equality: same prime, kind, valuation, precision and digits.
  friend bool operator==(const PadicNumber& a, const PadicNumber& b);

  // True when both are known modulo p^k and agree there.
  bool agrees_mod(const PadicNumber& other, int k) const;

  std::string to_string() const;
  // Short human form: "<representative> + O(p^k)".
  std::string to_short_string() const;

 private:
  PadicNumber() = default;
  void check_same_prime(const PadicNumber& other) const;

  long p_ = 2;
  bool zero_ = true;
  int v_ = 0;  // valuation for nonzero, absolute precision M for zero
  int n_ = 0;  // relative precision
  mpz_class unit_;
};

std::ostream& operator<<(std::ostream& os, const PadicNumber& x);

// Free-function spellings of the core operations.
inline Valuation val(const PadicNumber& x) { return x.valuation(); }
inline PadicNumber from_rational(const mpz_class& a, const mpz_class& b, long p, int n) {
  return PadicNumber::from_rational(a, b, p, n);
}

std::string rational_to_string(const mpq_class& q);
// Parses "a", "-a", "a/b".
mpq_class parse_rational(std::string_view text);

bool is_prime(long p);

}  // namespace padic
