#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "padic/ball.hpp"
#include "padic/number.hpp"

namespace padic {

// Guards select a Piecewise branch from the branch input x.
struct CosetIs {
  int n;             // x in lambda * P_n
  mpq_class lambda;  // nonzero
};
struct ValuationIn {
  std::vector<int> values;  // used when modulus == 0
  int modulus = 0;          // v(x) = residue (mod modulus) when modulus > 0
  int residue = 0;
};
struct InBall {
  mpq_class center;
  int radius;
};
struct Otherwise {};

using Guard = std::variant<CosetIs, ValuationIn, InBall, Otherwise>;

bool operator==(const Guard& a, const Guard& b);

enum class Decision { False, True, Unknown };

class FuncExpr;

enum class Op { RationalConst, Var, Add, Sub, Mul, Div, IntPow, Compose, Piecewise, DigitSpread, NthRootBranch };

std::string_view op_name(Op op);

/// Immutable expression tree for a function of one p-adic variable x.
///
/// DigitSpread(d) and NthRootBranch(n, r) are functions of x; apply them to
/// a subexpression with Compose(outer, inner). Piecewise guards test the
/// Piecewise node's own input.
class FuncExpr {
 public:
  struct Case;
  struct Node;

  FuncExpr();  // Var

  static FuncExpr constant(const mpq_class& c);
  static FuncExpr var();
  static FuncExpr add(FuncExpr a, FuncExpr b);
  static FuncExpr sub(FuncExpr a, FuncExpr b);
  static FuncExpr mul(FuncExpr a, FuncExpr b);
  static FuncExpr div(FuncExpr a, FuncExpr b);
  static FuncExpr int_pow(FuncExpr base, int e);
  static FuncExpr compose(FuncExpr outer, FuncExpr inner);
  static FuncExpr piecewise(std::vector<Case> cases);
  static FuncExpr digit_spread(int d);
  // The n-th root whose unit part is congruent to branch mod p^hensel_m.
  static FuncExpr nth_root_branch(int n, const mpz_class& branch);

  Op op() const;
  const Node& node() const { return *node_; }

  friend bool operator==(const FuncExpr& a, const FuncExpr& b);

 private:
  explicit FuncExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct FuncExpr::Case {
  Guard guard;
  FuncExpr expr;
};

struct FuncExpr::Node {
  Op op = Op::Var;
  mpq_class value;                 // RationalConst
  int integer = 0;                 // IntPow exponent, DigitSpread d, NthRootBranch n
  mpz_class branch;                // NthRootBranch selector
  std::vector<FuncExpr> args;      // operands; Compose is {outer, inner}
  std::vector<FuncExpr::Case> cases;
};

FuncExpr operator+(const FuncExpr& a, const FuncExpr& b);
FuncExpr operator-(const FuncExpr& a, const FuncExpr& b);
FuncExpr operator*(const FuncExpr& a, const FuncExpr& b);
FuncExpr operator/(const FuncExpr& a, const FuncExpr& b);

struct EvalOptions {
  // Relative precision for constants and for exact inputs.
  int precision = 8;
};

/// Guard decision for an input known only modulo p^absolute_precision().
Decision decide(const Guard& g, const PadicNumber& x);
/// Guard decision for an exact rational input.
bool decide_exact(const Guard& g, const mpq_class& x, long p);

/// f(x) for x known modulo p^x.absolute_precision(). The result is correct
/// modulo p^result.absolute_precision().
PadicNumber eval(const FuncExpr& f, const PadicNumber& x, const EvalOptions& opts = {});

struct Evaluated {
  PadicNumber value;
  std::optional<mpq_class> exact;  // set when f(x) is a known rational
};

/// f(x) for the exact rational x. Rational subexpressions are computed
/// exactly; the others carry tracked precision starting from opts.precision.
Evaluated eval_exact(const FuncExpr& f, const mpq_class& x, long p, const EvalOptions& opts = {});

/// Formal derivative. Piecewise is differentiated branch by branch.
FuncExpr symbolic_derivative(const FuncExpr& f);

/// { f(x) mod p^k_out : x a residue of B mod p^k_in }.
std::set<mpq_class> image_residues(const FuncExpr& f, const Ball& b, int k_in, int k_out,
                                   std::size_t cap = kDefaultEnumerationCap, const EvalOptions& opts = {});

// Compact syntax, documented in docs/grammar.md.
FuncExpr parse_expr(std::string_view text);
std::string to_string(const FuncExpr& f);
std::string to_string(const Guard& g);

nlohmann::json to_json(const FuncExpr& f);
FuncExpr expr_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Guard& g);
Guard guard_from_json(const nlohmann::json& j);

// Integers as JSON numbers when they fit, other rationals as "a/b" strings.
nlohmann::json rational_json(const mpq_class& q);
mpq_class rational_from_json(const nlohmann::json& j);

/// True when f contains no DigitSpread (so symbolic_derivative applies).
bool is_differentiable_fragment(const FuncExpr& f);

}  // namespace padic
