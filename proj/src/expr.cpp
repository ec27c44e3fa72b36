#include "padic/expr.hpp"

#include <algorithm>

#include "padic/cosets.hpp"

namespace padic {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::RationalConst: return "RationalConst";
    case Op::Var: return "Var";
    case Op::Add: return "Add";
    case Op::Sub: return "Sub";
    case Op::Mul: return "Mul";
    case Op::Div: return "Div";
    case Op::IntPow: return "IntPow";
    case Op::Compose: return "Compose";
    case Op::Piecewise: return "Piecewise";
    case Op::DigitSpread: return "DigitSpread";
    case Op::NthRootBranch: return "NthRootBranch";
  }
  return "?";
}

namespace {

std::shared_ptr<FuncExpr::Node> make(Op op) {
  auto n = std::make_shared<FuncExpr::Node>();
  n->op = op;
  return n;
}

}  // namespace

FuncExpr::FuncExpr() : node_(make(Op::Var)) {}

FuncExpr FuncExpr::constant(const mpq_class& c) {
  auto n = make(Op::RationalConst);
  n->value = c;
  n->value.canonicalize();
  return FuncExpr(n);
}

FuncExpr FuncExpr::var() { return FuncExpr(); }

#define PADIC_BINARY(NAME, OP)                     \
  FuncExpr FuncExpr::NAME(FuncExpr a, FuncExpr b) { \
    auto n = make(OP);                              \
    n->args = {std::move(a), std::move(b)};         \
    return FuncExpr(n);                             \
  }
PADIC_BINARY(add, Op::Add)
PADIC_BINARY(sub, Op::Sub)
PADIC_BINARY(mul, Op::Mul)
PADIC_BINARY(div, Op::Div)
#undef PADIC_BINARY

FuncExpr FuncExpr::int_pow(FuncExpr base, int e) {
  auto n = make(Op::IntPow);
  n->integer = e;
  n->args = {std::move(base)};
  return FuncExpr(n);
}

FuncExpr FuncExpr::compose(FuncExpr outer, FuncExpr inner) {
  auto n = make(Op::Compose);
  n->args = {std::move(outer), std::move(inner)};
  return FuncExpr(n);
}

FuncExpr FuncExpr::piecewise(std::vector<Case> cases) {
  if (cases.empty()) fail(Errc::InvalidArgument, "Piecewise needs at least one case");
  for (const auto& c : cases) {
    if (const auto* g = std::get_if<CosetIs>(&c.guard)) {
      if (g->n < 1) fail(Errc::InvalidArgument, "coset guard needs n >= 1");
      if (g->lambda == 0) fail(Errc::InvalidArgument, "coset guard needs a nonzero lambda");
    }
    if (const auto* g = std::get_if<ValuationIn>(&c.guard)) {
      if (g->modulus < 0) fail(Errc::InvalidArgument, "valuation modulus must be positive");
    }
  }
  auto n = make(Op::Piecewise);
  n->cases = std::move(cases);
  return FuncExpr(n);
}

FuncExpr FuncExpr::digit_spread(int d) {
  if (d < 2) fail(Errc::InvalidArgument, "DigitSpread needs d >= 2");
  auto n = make(Op::DigitSpread);
  n->integer = d;
  return FuncExpr(n);
}

FuncExpr FuncExpr::nth_root_branch(int n_, const mpz_class& branch) {
  if (n_ < 1) fail(Errc::InvalidArgument, "NthRootBranch needs n >= 1");
  auto n = make(Op::NthRootBranch);
  n->integer = n_;
  n->branch = branch;
  return FuncExpr(n);
}

Op FuncExpr::op() const { return node_->op; }

bool operator==(const Guard& a, const Guard& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, CosetIs>) return x.n == y.n && x.lambda == y.lambda;
        if constexpr (std::is_same_v<T, ValuationIn>) {
          return x.modulus == y.modulus && (x.modulus > 0 ? x.residue == y.residue : x.values == y.values);
        }
        if constexpr (std::is_same_v<T, InBall>) return x.center == y.center && x.radius == y.radius;
        return true;
      },
      a);
}

bool operator==(const FuncExpr& a, const FuncExpr& b) {
  const auto& x = a.node();
  const auto& y = b.node();
  if (&x == &y) return true;
  if (x.op != y.op || x.value != y.value || x.integer != y.integer || x.branch != y.branch) return false;
  if (x.args.size() != y.args.size() || x.cases.size() != y.cases.size()) return false;
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (!(x.args[i] == y.args[i])) return false;
  }
  for (std::size_t i = 0; i < x.cases.size(); ++i) {
    if (!(x.cases[i].guard == y.cases[i].guard) || !(x.cases[i].expr == y.cases[i].expr)) return false;
  }
  return true;
}

FuncExpr operator+(const FuncExpr& a, const FuncExpr& b) { return FuncExpr::add(a, b); }
FuncExpr operator-(const FuncExpr& a, const FuncExpr& b) { return FuncExpr::sub(a, b); }
FuncExpr operator*(const FuncExpr& a, const FuncExpr& b) { return FuncExpr::mul(a, b); }
FuncExpr operator/(const FuncExpr& a, const FuncExpr& b) { return FuncExpr::div(a, b); }

// ---------------------------------------------------------------------------
// Guards

namespace {

// Exact valuation of a nonzero rational.
int rational_val(const mpq_class& q, long p) {
  return valuation_of(q.get_num(), p, 1 << 20) - valuation_of(q.get_den(), p, 1 << 20);
}

int floor_mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

bool valuation_matches(const ValuationIn& g, int v) {
  if (g.modulus > 0) return floor_mod(v - g.residue, g.modulus) == 0;
  return std::find(g.values.begin(), g.values.end(), v) != g.values.end();
}

std::size_t coset_index(const PadicNumber& x, int n) {
  return classify(x, cached_coset_table(x.prime(), n)).index;
}

}  // namespace

Decision decide(const Guard& g, const PadicNumber& x) {
  const long p = x.prime();
  auto from_bool = [](bool b) { return b ? Decision::True : Decision::False; };
  return std::visit(
      [&](const auto& gg) -> Decision {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, Otherwise>) {
          return Decision::True;
        } else if constexpr (std::is_same_v<T, ValuationIn>) {
          if (!x.is_zero()) return from_bool(valuation_matches(gg, x.val()));
          if (gg.modulus > 0) return Decision::Unknown;
          const int m = x.absolute_precision();
          const bool reachable = std::any_of(gg.values.begin(), gg.values.end(), [&](int v) { return v >= m; });
          return reachable ? Decision::Unknown : Decision::False;
        } else if constexpr (std::is_same_v<T, InBall>) {
          const int k = std::min(x.absolute_precision(), gg.radius);
          const mpq_class c = PadicNumber::from_residue(gg.center, p, k).residue(k);
          if (x.residue(k) != c) return Decision::False;
          return k == gg.radius ? Decision::True : Decision::Unknown;
        } else {
          if (x.is_zero()) return Decision::Unknown;
          const PadicNumber lambda = PadicNumber::from_rational(gg.lambda, p, hensel_exponent(p, gg.n) + 2);
          if (floor_mod(x.val() - lambda.val(), gg.n) != 0) return Decision::False;
          if (x.relative_precision() < hensel_exponent(p, gg.n)) return Decision::Unknown;
          return from_bool(coset_index(x, gg.n) == coset_index(lambda, gg.n));
        }
      },
      g);
}

bool decide_exact(const Guard& g, const mpq_class& x, long p) {
  return std::visit(
      [&](const auto& gg) -> bool {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, Otherwise>) {
          return true;
        } else if constexpr (std::is_same_v<T, ValuationIn>) {
          return x != 0 && valuation_matches(gg, rational_val(x, p));
        } else if constexpr (std::is_same_v<T, InBall>) {
          const mpq_class d = x - gg.center;
          return d == 0 || rational_val(d, p) >= gg.radius;
        } else {
          if (x == 0) return false;
          const int prec = hensel_exponent(p, gg.n) + 2;
          const PadicNumber xv = PadicNumber::from_rational(x, p, prec);
          const PadicNumber lv = PadicNumber::from_rational(gg.lambda, p, prec);
          if (floor_mod(xv.val() - lv.val(), gg.n) != 0) return false;
          return coset_index(xv, gg.n) == coset_index(lv, gg.n);
        }
      },
      g);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

// A value during evaluation: an exact rational when one is known, otherwise
// a p-adic approximation.
struct Value {
  std::optional<mpq_class> exact;
  std::optional<PadicNumber> approx;
};

class Evaluator {
 public:
  Evaluator(long p, const EvalOptions& opts) : p_(p), opts_(opts) {}

  PadicNumber as_padic(const Value& v, int rel_prec) const {
    if (v.approx) return *v.approx;
    return PadicNumber::from_rational(*v.exact, p_, std::max(1, rel_prec));
  }

  PadicNumber to_padic(const Value& v) const { return as_padic(v, opts_.precision); }

  Value run(const FuncExpr& f, const Value& x) const {
    const auto& n = f.node();
    switch (n.op) {
      case Op::RationalConst: return {n.value, std::nullopt};
      case Op::Var: return x;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: return binary(n.op, run(n.args[0], x), run(n.args[1], x));
      case Op::IntPow: return power(run(n.args[0], x), n.integer);
      case Op::Compose: return run(n.args[0], run(n.args[1], x));
      case Op::Piecewise: return piecewise(n, x);
      case Op::DigitSpread: return spread(x, n.integer);
      case Op::NthRootBranch: return root(x, n.integer, n.branch);
    }
    fail(Errc::UnsupportedExpression, "unknown node");
  }

 private:
  // Precision at which an exact partner must be materialized so it does not
  // limit the approximate operand.
  PadicNumber partner(const mpq_class& c, const PadicNumber& other, bool additive) const {
    if (c == 0) return PadicNumber::zero(p_, other.absolute_precision());
    int rel = std::max(opts_.precision, other.relative_precision());
    if (additive) {
      const PadicNumber probe = PadicNumber::from_rational(c, p_, 1);
      rel = std::max(rel, other.absolute_precision() - probe.val() + 1);
    }
    return PadicNumber::from_rational(c, p_, rel);
  }

  Value binary(Op op, const Value& a, const Value& b) const {
    if (a.exact && b.exact) {
      switch (op) {
        case Op::Add: return {*a.exact + *b.exact, std::nullopt};
        case Op::Sub: return {*a.exact - *b.exact, std::nullopt};
        case Op::Mul: return {*a.exact * *b.exact, std::nullopt};
        default:
          if (*b.exact == 0) fail(Errc::DivisionByZero, "division by exact zero");
          return {*a.exact / *b.exact, std::nullopt};
      }
    }
    // Exact zeros are absorbing for products.
    if (op == Op::Mul && ((a.exact && *a.exact == 0) || (b.exact && *b.exact == 0))) return {mpq_class(0), std::nullopt};
    if (op == Op::Div && b.exact && *b.exact == 0) fail(Errc::DivisionByZero, "division by exact zero");
    if (op == Op::Div && a.exact && *a.exact == 0) return {mpq_class(0), std::nullopt};
    const bool additive = op == Op::Add || op == Op::Sub;
    const PadicNumber x = a.exact ? partner(*a.exact, *b.approx, additive) : *a.approx;
    const PadicNumber y = b.exact ? partner(*b.exact, *a.approx, additive) : *b.approx;
    switch (op) {
      case Op::Add: return {std::nullopt, x + y};
      case Op::Sub: return {std::nullopt, x - y};
      case Op::Mul: return {std::nullopt, x * y};
      default: return {std::nullopt, x / y};
    }
  }

  Value power(const Value& a, int e) const {
    if (a.exact) {
      if (*a.exact == 0 && e < 0) fail(Errc::DivisionByZero, "negative power of exact zero");
      mpq_class r(1);
      mpq_class base = e < 0 ? mpq_class(1) / *a.exact : *a.exact;
      for (int i = 0, m = std::abs(e); i < m; ++i) r *= base;
      return {r, std::nullopt};
    }
    return {std::nullopt, a.approx->pow(e)};
  }

  Value piecewise(const FuncExpr::Node& n, const Value& x) const {
    if (x.exact) {
      for (const auto& c : n.cases) {
        if (decide_exact(c.guard, *x.exact, p_)) return run(c.expr, x);
      }
      fail(Errc::OutOfDomain, "no Piecewise guard holds at " + rational_to_string(*x.exact));
    }
    std::vector<const FuncExpr*> candidates;
    bool settled = false;
    for (const auto& c : n.cases) {
      const Decision d = decide(c.guard, *x.approx);
      if (d == Decision::False) continue;
      candidates.push_back(&c.expr);
      if (d == Decision::True) {
        settled = candidates.size() == 1;
        break;
      }
    }
    if (candidates.empty()) fail(Errc::OutOfDomain, "no Piecewise guard holds at " + x.approx->to_short_string());
    if (settled) return run(*candidates.front(), x);
    // Several branches remain possible; accept only if they agree.
    std::vector<PadicNumber> values;
    for (const FuncExpr* e : candidates) {
      try {
        values.push_back(to_padic(run(*e, x)));
      } catch (const PadicError& err) {
        fail(Errc::GuardUndecidableAtPrecision, "input " + x.approx->to_short_string() +
                                                    " admits a branch that fails: " + err.what());
      }
    }
    int k = values.front().absolute_precision();
    for (const auto& v : values) k = std::min(k, v.absolute_precision());
    for (const auto& v : values) {
      if (!v.agrees_mod(values.front(), k)) {
        fail(Errc::GuardUndecidableAtPrecision, "guards undecided at " + x.approx->to_short_string());
      }
    }
    return {std::nullopt, values.front().truncated(k)};
  }

  Value spread(const Value& x, int d) const {
    if (x.exact && x.exact->get_den() == 1 && sgn(*x.exact) >= 0) {
      // Non-negative integers have finite expansions.
      mpz_class rest = x.exact->get_num();
      mpz_class out = 0;
      const mpz_class step = ipow(p_, d);
      mpz_class place = 1;
      while (rest != 0) {
        out += place * (rest % p_);
        rest /= p_;
        place *= step;
      }
      return {mpq_class(out), std::nullopt};
    }
    const PadicNumber v = to_padic(x);
    if (v.is_zero()) return {std::nullopt, PadicNumber::zero(p_, d * v.absolute_precision())};
    mpq_class out = 0;
    const auto digits = v.digits();
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (digits[i] == 0) continue;
      const int pos = d * (v.val() + static_cast<int>(i));
      const mpq_class place = pos >= 0 ? mpq_class(ipow(p_, pos)) : mpq_class(1) / mpq_class(ipow(p_, -pos));
      out += place * digits[i];
    }
    return {std::nullopt, PadicNumber::from_residue(out, p_, d * v.absolute_precision())};
  }

  Value root(const Value& x, int n, const mpz_class& branch) const {
    if (x.exact && *x.exact == 0) fail(Errc::OutOfDomain, "NthRootBranch is not defined at 0");
    const PadicNumber v = to_padic(x);
    if (v.is_zero()) fail(Errc::PrecisionExhausted, "NthRootBranch input is 0 at the known precision");
    if (n == 1) return {std::nullopt, v};
    const int val = v.val();
    if (floor_mod(val, n) != 0) fail(Errc::OutOfDomain, "valuation " + std::to_string(val) + " not divisible by n");
    const int m = hensel_exponent(p_, n);
    const int rel = v.relative_precision();
    if (rel < m) fail(Errc::PrecisionExhausted, "NthRootBranch needs " + std::to_string(m) + " unit digits");
    const mpz_class mod = ipow(p_, m);
    mpz_class r = branch % mod;
    if (r < 0) r += mod;
    if (r % p_ == 0) fail(Errc::OutOfDomain, "NthRootBranch selector is not a unit");
    mpz_class rn;
    mpz_powm_ui(rn.get_mpz_t(), r.get_mpz_t(), static_cast<unsigned long>(n), mod.get_mpz_t());
    if (rn != v.unit() % mod) fail(Errc::OutOfDomain, "unit part has no root on the selected branch");
    const int vn = (m - 1) / 2;
    if (rel - vn < 1) fail(Errc::PrecisionExhausted, "too few digits for the n-th root");
    std::vector<PadicNumber> cs(static_cast<std::size_t>(n) + 1, PadicNumber::zero(p_, rel + m + 2));
    cs.front() = -PadicNumber::from_unit(p_, 0, v.unit(), rel);
    cs.back() = PadicNumber::from_integer(1, p_, rel + m + 2);
    const PadicNumber z = hensel_lift(Polynomial(std::move(cs)), PadicNumber::from_integer(r, p_, m), rel);
    if (z.residue(m) != mpq_class(r)) fail(Errc::OutOfDomain, "root leaves the selected branch");
    const PadicNumber zu = z.truncated(std::min(z.absolute_precision(), rel - vn));
    return {std::nullopt, PadicNumber::from_unit(p_, val / n, zu.unit(), zu.relative_precision())};
  }

  long p_;
  EvalOptions opts_;
};

}  // namespace

PadicNumber eval(const FuncExpr& f, const PadicNumber& x, const EvalOptions& opts) {
  Evaluator ev(x.prime(), opts);
  const Value out = ev.run(f, Value{std::nullopt, x});
  if (out.approx) return *out.approx;
  // f is constant on the input class.
  return ev.as_padic(out, std::max(opts.precision, x.absolute_precision()));
}

Evaluated eval_exact(const FuncExpr& f, const mpq_class& x, long p, const EvalOptions& opts) {
  if (!is_prime(p)) fail(Errc::InvalidArgument, "p is not prime");
  Evaluator ev(p, opts);
  const Value out = ev.run(f, Value{x, std::nullopt});
  return {ev.to_padic(out), out.exact};
}

// ---------------------------------------------------------------------------
// Derivative

namespace {

bool is_const(const FuncExpr& f, long c) { return f.op() == Op::RationalConst && f.node().value == c; }

FuncExpr s_add(const FuncExpr& a, const FuncExpr& b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (a.op() == Op::RationalConst && b.op() == Op::RationalConst) return FuncExpr::constant(a.node().value + b.node().value);
  return a + b;
}

FuncExpr s_sub(const FuncExpr& a, const FuncExpr& b) {
  if (is_const(b, 0)) return a;
  if (a.op() == Op::RationalConst && b.op() == Op::RationalConst) return FuncExpr::constant(a.node().value - b.node().value);
  return a - b;
}

FuncExpr s_mul(const FuncExpr& a, const FuncExpr& b) {
  if (is_const(a, 0) || is_const(b, 0)) return FuncExpr::constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (a.op() == Op::RationalConst && b.op() == Op::RationalConst) return FuncExpr::constant(a.node().value * b.node().value);
  return a * b;
}

FuncExpr s_div(const FuncExpr& a, const FuncExpr& b) {
  if (is_const(a, 0)) return FuncExpr::constant(0);
  if (is_const(b, 1)) return a;
  return a / b;
}

FuncExpr s_pow(const FuncExpr& a, int e) {
  if (e == 0) return FuncExpr::constant(1);
  if (e == 1) return a;
  return FuncExpr::int_pow(a, e);
}

FuncExpr s_compose(const FuncExpr& outer, const FuncExpr& inner) {
  if (outer.op() == Op::RationalConst) return outer;
  if (outer.op() == Op::Var) return inner;
  if (inner.op() == Op::Var) return outer;
  return FuncExpr::compose(outer, inner);
}

}  // namespace

FuncExpr symbolic_derivative(const FuncExpr& f) {
  const auto& n = f.node();
  switch (n.op) {
    case Op::RationalConst: return FuncExpr::constant(0);
    case Op::Var: return FuncExpr::constant(1);
    case Op::Add: return s_add(symbolic_derivative(n.args[0]), symbolic_derivative(n.args[1]));
    case Op::Sub: return s_sub(symbolic_derivative(n.args[0]), symbolic_derivative(n.args[1]));
    case Op::Mul: {
      const auto& a = n.args[0];
      const auto& b = n.args[1];
      return s_add(s_mul(symbolic_derivative(a), b), s_mul(a, symbolic_derivative(b)));
    }
    case Op::Div: {
      const auto& a = n.args[0];
      const auto& b = n.args[1];
      const FuncExpr num = s_sub(s_mul(symbolic_derivative(a), b), s_mul(a, symbolic_derivative(b)));
      return s_div(num, s_pow(b, 2));
    }
    case Op::IntPow: {
      const int e = n.integer;
      if (e == 0) return FuncExpr::constant(0);
      return s_mul(s_mul(FuncExpr::constant(e), s_pow(n.args[0], e - 1)), symbolic_derivative(n.args[0]));
    }
    case Op::Compose:
      return s_mul(s_compose(symbolic_derivative(n.args[0]), n.args[1]), symbolic_derivative(n.args[1]));
    case Op::Piecewise: {
      std::vector<FuncExpr::Case> cases;
      for (const auto& c : n.cases) cases.push_back({c.guard, symbolic_derivative(c.expr)});
      return FuncExpr::piecewise(std::move(cases));
    }
    case Op::DigitSpread: fail(Errc::UnsupportedExpression, "DigitSpread has no symbolic derivative");
    case Op::NthRootBranch:
      // y^n = x gives y' = y / (n x).
      if (n.integer == 1) return FuncExpr::constant(1);
      return s_div(f, s_mul(FuncExpr::constant(n.integer), FuncExpr::var()));
  }
  fail(Errc::UnsupportedExpression, "unknown node");
}

bool is_differentiable_fragment(const FuncExpr& f) {
  const auto& n = f.node();
  if (n.op == Op::DigitSpread) return false;
  for (const auto& a : n.args) {
    if (!is_differentiable_fragment(a)) return false;
  }
  for (const auto& c : n.cases) {
    if (!is_differentiable_fragment(c.expr)) return false;
  }
  return true;
}

std::set<mpq_class> image_residues(const FuncExpr& f, const Ball& b, int k_in, int k_out, std::size_t cap,
                                   const EvalOptions& opts) {
  std::set<mpq_class> out;
  for (const auto& x : enumerate_ball(b, k_in, cap)) {
    const PadicNumber y = eval(f, x, opts);
    if (y.absolute_precision() < k_out) {
      fail(Errc::PrecisionInsufficientForImage, "f(" + x.to_short_string() + ") is known only mod p^" +
                                                    std::to_string(y.absolute_precision()) + ", need p^" +
                                                    std::to_string(k_out));
    }
    out.insert(y.residue(k_out));
  }
  return out;
}

}  // namespace padic
