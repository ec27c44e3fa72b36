#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "padic/number.hpp"

namespace padic {

/// Polynomial with p-adic coefficients, constant term first.
class Polynomial {
 public:
  explicit Polynomial(std::vector<PadicNumber> coeffs);
  // Integer coefficients at relative precision rel_prec.
  static Polynomial from_integers(const std::vector<long>& coeffs, long p, int rel_prec);

  long prime() const { return coeffs_.front().prime(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<PadicNumber>& coefficients() const { return coeffs_; }

  PadicNumber operator()(const PadicNumber& x) const;
  Polynomial derivative() const;

 private:
  std::vector<PadicNumber> coeffs_;
};

/// Newton-Hensel lifting of a simple root.
///
/// Requires v(f(x0)) > 2 v(f'(x0)). Returns the unique root z of f with
/// v(z - x0) > v(f'(x0)), known well enough that f(z) = 0 mod p^target_prec.
PadicNumber hensel_lift(const Polynomial& f, const PadicNumber& x0, int target_prec);

/// m = 2 v_p(n) + 1; guarantees 1 + p^m Z_p lies in the n-th powers.
int hensel_exponent(long p, int n);

/// True iff x is a nonzero n-th power in Q_p.
bool is_nth_power(const PadicNumber& x, int n);

struct CosetRepresentative {
  int valuation;        // in [0, n)
  mpz_class unit;       // smallest positive representative mod p^hensel_m
  mpz_class value;      // p^valuation * unit
};

/// Representatives Lambda_n of Q_p^x / P_n, with P_n the nonzero n-th powers.
class CosetTable {
 public:
  long prime() const { return p_; }
  int exponent() const { return n_; }
  int hensel_m() const { return m_; }
  const std::vector<CosetRepresentative>& representatives() const { return reps_; }
  std::size_t size() const { return reps_.size(); }
  // Index into representatives() for a unit residue class and valuation.
  std::size_t index_of(int valuation_mod_n, const mpz_class& unit_residue) const;

  // Representative as an element of Q_p at relative precision rel_prec.
  PadicNumber lambda(std::size_t index, int rel_prec) const;

 private:
  friend CosetTable build_coset_table(long p, int n, std::size_t cap);
  long p_ = 2;
  int n_ = 1;
  int m_ = 1;
  mpz_class modulus_;                    // p^m
  std::vector<CosetRepresentative> reps_;
  std::vector<std::size_t> unit_class_;  // unit residue mod p^m -> unit class index
  std::size_t unit_classes_ = 0;
};

struct CosetLabel {
  const CosetTable* table;
  std::size_t index;

  const CosetRepresentative& representative() const { return table->representatives()[index]; }
};

CosetTable build_coset_table(long p, int n, std::size_t cap = 1'000'000);

// Process-wide table for (p, n), built on first use. The reference stays valid.
const CosetTable& cached_coset_table(long p, int n);

/// The coset lambda P_n containing x.
CosetLabel classify(const PadicNumber& x, const CosetTable& table);

nlohmann::json to_json(const CosetTable& table);

}  // namespace padic
