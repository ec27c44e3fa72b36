#pragma once

#include <optional>
#include <set>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "padic/ball.hpp"
#include "padic/certify.hpp"
#include "padic/expr.hpp"

namespace padic {

/// Haar measure with mu(Z_p) = 1: p^-radius_val.
mpq_class ball_measure(const Ball& b);

/// |S| p^-k for a set of residues modulo p^k.
mpq_class residue_set_measure(const std::set<mpq_class>& residues, long p, int k);

struct DfPiece {
  Ball ball;
  std::optional<int> e;  // |Df| = p^-e on the ball; empty when Df = 0
};

struct BallDecomposition {
  BallDecomposition(const Ball& d, int k_) : domain(d), k(k_) {}

  Ball domain;
  int k = 0;
  std::vector<DfPiece> pieces;  // disjoint, in residue order
  std::vector<Ball> remainder;  // radius-k balls that could not be certified
};

/// Disjoint balls of X with constant |Df| that pass the isometry check, or
/// on which Df converged to 0 at the center and every spot point. Balls
/// are split down to radius k.
BallDecomposition decompose_by_Df(const FuncExpr& f, const Ball& x, int k, const CertifyOptions& opts = {});

/// Sum of p^-e mu(B) over the pieces.
mpq_class integrate_abs_Df(const BallDecomposition& d);
mpq_class integrate_abs_Df(const FuncExpr& f, const Ball& x, int k, const CertifyOptions& opts = {});

struct ChangeOfVariablesReport {
  ChangeOfVariablesReport(BallDecomposition d) : decomposition(std::move(d)) {}

  int k_in = 0;
  int k_out = 0;
  std::size_t inputs = 0;
  std::size_t images = 0;
  mpq_class lhs;  // mu(f(X)) from image residues
  mpq_class rhs;  // integral of |Df|
  mpq_class difference;
  BallDecomposition decomposition;
};

/// Compares mu(f(X)) at scale k_out with the integral of |Df| over X at
/// scale k_in. k_out defaults to k_in plus the largest e found.
ChangeOfVariablesReport verify_change_of_variables(const FuncExpr& f, const Ball& x, int k_in,
                                                   std::optional<int> k_out = std::nullopt,
                                                   const CertifyOptions& opts = {});

nlohmann::json to_json(const BallDecomposition& d);
nlohmann::json to_json(const ChangeOfVariablesReport& r);

}  // namespace padic
