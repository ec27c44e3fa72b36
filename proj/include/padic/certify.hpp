#pragma once

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "padic/ball.hpp"
#include "padic/calculus.hpp"
#include "padic/expr.hpp"

namespace padic {

struct SolveStep {
  int iteration = 0;
  mpq_class x;
  std::optional<int> step_val;  // v(x_i - x_{i-1}); empty for the start
  int residual_val = 0;         // v(f(x_i) - c), capped at the tolerance
};

struct SolveResult {
  PadicNumber z;  // known modulo p^tol_exponent - v(Df_a)
  int radius = 0;
  int iterations = 0;
  std::vector<SolveStep> log;
};

/// Fixed point of x -> x - (f(x) - c) / Df_a started at a, stopping once
/// v(f(x) - c) >= tol_exponent. Iterates must stay in Ball(a, radius); the
/// default radius is v(c - f(a)) - v(Df_a).
SolveResult local_solve(const FuncExpr& f, const PadicNumber& a, const PadicNumber& df_a, const PadicNumber& c,
                        int tol_exponent, int max_iter = 64, std::optional<int> radius = std::nullopt);

struct CertifyOptions {
  std::size_t budget = 1'000'000;
  // Pair budget for each strict derivative estimate.
  std::size_t derivative_budget = 20'000;
  std::size_t spot_points = 4;  // points besides the center for (b) and (c)
  int s = 4;
  std::uint64_t seed = 0;
};

struct PairWitness {
  mpq_class x;
  mpq_class y;
  int v_dx = 0;
  int v_df = 0;
  bool v_df_lower_bound = false;  // f(x) = f(y) modulo p^(k + e)
};

struct JacobianCertificate {
  JacobianCertificate(const Ball& b, int k_) : ball(b), k(k_) {}

  Ball ball;
  int k = 0;
  std::optional<int> e;  // |Df| = p^-e; empty when Df vanished everywhere sampled
  bool exhaustive = true;
  std::size_t residues = 0;

  struct CheckA {
    bool pass = false;
    std::optional<Ball> image_ball;
    std::size_t image_count = 0;
    std::size_t witnesses = 0;
    std::string detail;
  } a;
  struct CheckB {
    bool pass = false;
    std::vector<DiffEstimate> estimates;  // center first
  } b;
  struct CheckC {
    bool pass = false;
    std::vector<std::pair<mpq_class, std::optional<int>>> norms;  // point, v(Df)
  } c;
  struct CheckD {
    bool pass = false;
    std::optional<PairWitness> witness;
    std::string detail;
  } d;

  bool pass() const { return a.pass && b.pass && c.pass && d.pass; }
};

struct MonotonicityCertificate {
  MonotonicityCertificate(const Ball& b, int k_, bool strict_) : ball(b), k(k_), value_precision(2 * k_), strict(strict_) {}

  Ball ball;
  int k = 0;
  int value_precision = 0;
  bool strict = true;
  bool pass = false;
  std::size_t residues = 0;
  struct Triple {
    mpq_class x, y, z;
  };
  std::optional<Triple> witness;
};

enum class PartitionTag { U, V, I };

std::string_view tag_name(PartitionTag t);

struct PartitionEntry {
  PartitionEntry(const Ball& b, PartitionTag t) : ball(b), tag(t) {}

  Ball ball;
  PartitionTag tag;
  std::optional<int> e;             // V
  std::optional<Ball> image_ball;   // V
  std::optional<PointKind> center;  // I: classification of the center
  std::string note;
};

struct DomainPartition {
  DomainPartition(const Ball& d, int k_, int n_) : domain(d), k(k_), n(n_) {}

  Ball domain;
  int k = 0;
  int n = 1;
  std::vector<PartitionEntry> entries;  // disjoint, in residue order
};

/// B(f(center), r + e), with local_solve witnesses for every target class
/// modulo p^(min(k, r + 3) + e).
Ball local_image_ball(const FuncExpr& f, const Ball& b, int k, const CertifyOptions& opts = {});

/// Local Jacobian checks (a)-(d) on the residues of B modulo p^k. Failed
/// checks are reported in the certificate.
JacobianCertificate certify_jacobian(const FuncExpr& f, const Ball& b, int k, const CertifyOptions& opts = {});

/// Betweenness check over all residue triples of B modulo p^k, comparing
/// values modulo p^(2k). strict selects the strict form.
MonotonicityCertificate certify_monotone(const FuncExpr& f, const Ball& b, int k, bool strict = true,
                                         const CertifyOptions& opts = {});

/// Splits X until each ball is constant (U), passes certify_jacobian with
/// Df != 0 (V), or reaches radius k (I).
DomainPartition partition_domain(const FuncExpr& f, const Ball& x, int k, int n = 1, const CertifyOptions& opts = {});

nlohmann::json to_json(const SolveResult& r);
nlohmann::json to_json(const JacobianCertificate& c);
nlohmann::json to_json(const MonotonicityCertificate& c);
nlohmann::json to_json(const DomainPartition& d);
nlohmann::json to_json(const Ball& b);

}  // namespace padic
