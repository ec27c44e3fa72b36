#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "padic/cosets.hpp"
#include "padic/expr.hpp"
#include "padic/number.hpp"

namespace padic {

struct ScaleOptions {
  int j0 = 6;
  int jmax = 10;
  int s = 6;
  // Exhaustive when the pair (or increment) count is at most budget.
  std::size_t budget = 1'000'000;
  // Points per scale when sampling.
  std::size_t sample_points = 64;
  std::uint64_t seed = 0;
  // Relative precision for evaluations; 0 picks jmax + 2s + 8 and raises it
  // when the verdict is limited by precision.
  int precision = 0;
};

enum class Verdict { Converged, Unbounded, DirectionalDisagreement, Undetermined };

std::string_view verdict_name(Verdict v);

struct ScaleSummary {
  int j = 0;
  std::size_t points = 0;
  std::size_t pairs = 0;
  bool exhaustive = true;
  // min v(q - Qref) over the quotients q at this scale.
  int agreement = 0;
  bool agreement_lower_bound = false;  // limited by precision; the truth may be larger
  // min v(q); empty when every quotient vanished at the known precision.
  std::optional<int> min_quotient_val;
};

struct DiffEstimate {
  long prime = 0;
  mpq_class point;
  int j0 = 0;
  int jmax = 0;
  int s = 0;
  std::vector<ScaleSummary> scales;
  Verdict verdict = Verdict::Undetermined;
  // Converged: Df known modulo p^certified_scale.
  std::optional<PadicNumber> df;
  int certified_scale = 0;
  bool exhaustive = true;
  std::uint64_t seed = 0;
  int precision = 0;
  // DirectionalDisagreement: converged value per coset representative.
  std::vector<std::pair<mpz_class, PadicNumber>> directional;
};

struct DirectionalReport {
  long prime = 0;
  mpq_class point;
  int n = 1;
  std::vector<CosetRepresentative> lambdas;
  std::vector<DiffEstimate> estimates;  // parallel to lambdas
};

enum class PointKind { Differentiable, InS, InT, Undetermined };

std::string_view point_kind_name(PointKind k);

struct PointClassification {
  PointKind kind = PointKind::Undetermined;
  std::optional<PadicNumber> df;
  DirectionalReport report;
  std::optional<DiffEstimate> strict;
  DiffEstimate summary;  // carries DirectionalDisagreement for InS
};

/// (f(x) - f(y)) / (x - y) with the precision of the inputs.
PadicNumber difference_quotient(const FuncExpr& f, const PadicNumber& x, const PadicNumber& y,
                                const EvalOptions& opts = {});

/// Quotients over pairs of points a + p^j i, 0 <= i < p^s, for j0 <= j <= jmax.
/// Points are exact rationals (a is taken by its representative).
DiffEstimate strict_derivative(const FuncExpr& f, const mpq_class& a, long p, const ScaleOptions& opts = {});
DiffEstimate strict_derivative(const FuncExpr& f, const PadicNumber& a, const ScaleOptions& opts = {});

/// One-sided quotients (f(a + t) - f(a)) / t for t = lambda (p^j u)^n, u a unit mod p^s.
DiffEstimate directional_derivative(const FuncExpr& f, const mpq_class& a, long p, int n, const mpq_class& lambda,
                                    const ScaleOptions& opts = {});
DiffEstimate directional_derivative(const FuncExpr& f, const mpq_class& a, int n, const CosetLabel& lambda,
                                    const ScaleOptions& opts = {});

DirectionalReport directional_report(const FuncExpr& f, const mpq_class& a, long p, int n,
                                     const ScaleOptions& opts = {});

PointClassification classify_point(const FuncExpr& f, const mpq_class& a, long p, int n,
                                   const ScaleOptions& opts = {});

/// No direction lambda in Lambda_n shows unbounded quotients.
bool bounded_quotients(const FuncExpr& f, const mpq_class& a, long p, const ScaleOptions& opts = {}, int n = 1);

nlohmann::json to_json(const DiffEstimate& d);
nlohmann::json to_json(const DirectionalReport& r);
nlohmann::json to_json(const PointClassification& c);

// {"value": short form, "valuation", "digits", "abs_precision"}.
nlohmann::json padic_json(const PadicNumber& x);

}  // namespace padic
