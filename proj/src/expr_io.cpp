#include <cctype>
#include <sstream>

#include "padic/expr.hpp"

namespace padic {

namespace {

enum class Tok { Int, Ident, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t b = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Tok::Int, std::string(s.substr(b, i - b)), b});
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t b = i;
      while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(b, i - b)), b});
    } else if (std::string_view("+-*/^()[]{},;:").find(c) != std::string_view::npos) {
      out.push_back({Tok::Sym, std::string(1, c), i});
      ++i;
    } else {
      fail(Errc::ParseError, "unexpected character '" + std::string(1, c) + "' at offset " + std::to_string(i));
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  FuncExpr parse_all() {
    FuncExpr e = expr();
    if (peek().kind != Tok::End) error("trailing input");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool is_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool is_ident(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }

  [[noreturn]] void error(const std::string& what) const {
    const Token& t = peek();
    fail(Errc::ParseError, what + " at offset " + std::to_string(t.pos) + (t.text.empty() ? "" : " near '" + t.text + "'"));
  }

  void expect_sym(const char* s) {
    if (!is_sym(s)) error(std::string("expected '") + s + "'");
    ++pos_;
  }

  void expect_ident(const char* s) {
    if (!is_ident(s)) error(std::string("expected '") + s + "'");
    ++pos_;
  }

  mpz_class natural() {
    if (peek().kind != Tok::Int) error("expected an integer");
    return mpz_class(toks_[pos_++].text);
  }

  int small_int() {
    bool neg = false;
    if (is_sym("-")) {
      neg = true;
      ++pos_;
    }
    const mpz_class z = natural();
    if (!z.fits_sint_p()) error("integer out of range");
    return neg ? -static_cast<int>(z.get_si()) : static_cast<int>(z.get_si());
  }

  mpq_class rational() {
    bool neg = false;
    if (is_sym("-")) {
      neg = true;
      ++pos_;
    }
    mpq_class q(natural());
    if (is_sym("/")) {
      ++pos_;
      const mpz_class d = natural();
      if (d == 0) error("zero denominator");
      q /= d;
      q.canonicalize();
    }
    return neg ? mpq_class(-q) : q;
  }

  FuncExpr expr() {
    FuncExpr lhs = term();
    while (is_sym("+") || is_sym("-")) {
      const bool plus = peek().text == "+";
      ++pos_;
      FuncExpr rhs = term();
      lhs = plus ? lhs + rhs : lhs - rhs;
    }
    return lhs;
  }

  FuncExpr term() {
    FuncExpr lhs = unary();
    while (is_sym("*") || is_sym("/")) {
      const bool times = peek().text == "*";
      ++pos_;
      FuncExpr rhs = unary();
      if (!times && lhs.op() == Op::RationalConst && rhs.op() == Op::RationalConst && rhs.node().value != 0) {
        lhs = FuncExpr::constant(lhs.node().value / rhs.node().value);
      } else {
        lhs = times ? lhs * rhs : lhs / rhs;
      }
    }
    return lhs;
  }

  FuncExpr unary() {
    if (is_sym("-")) {
      ++pos_;
      FuncExpr u = unary();
      if (u.op() == Op::RationalConst) return FuncExpr::constant(-u.node().value);
      return FuncExpr::constant(-1) * u;
    }
    return power();
  }

  FuncExpr power() {
    FuncExpr base = atom();
    if (!is_sym("^")) return base;
    ++pos_;
    int e = 0;
    if (is_sym("(")) {
      ++pos_;
      e = small_int();
      expect_sym(")");
    } else {
      e = small_int();
    }
    return FuncExpr::int_pow(base, e);
  }

  FuncExpr atom() {
    if (peek().kind == Tok::Int) return FuncExpr::constant(mpq_class(natural()));
    if (is_sym("(")) {
      ++pos_;
      FuncExpr e = expr();
      expect_sym(")");
      return e;
    }
    if (peek().kind != Tok::Ident) error("expected an operand");
    const std::string id = toks_[pos_++].text;
    if (id == "x") return FuncExpr::var();
    if (id == "spread") {
      const int d = static_cast<int>(natural().get_si());
      return apply(FuncExpr::digit_spread(d), parenthesized());
    }
    if (id == "root") {
      const int n = static_cast<int>(natural().get_si());
      expect_sym("[");
      bool neg = false;
      if (is_sym("-")) {
        neg = true;
        ++pos_;
      }
      mpz_class r = natural();
      if (neg) r = -r;
      expect_sym("]");
      return apply(FuncExpr::nth_root_branch(n, r), parenthesized());
    }
    if (id == "compose") {
      expect_sym("(");
      FuncExpr outer = expr();
      expect_sym(",");
      FuncExpr inner = expr();
      expect_sym(")");
      return FuncExpr::compose(outer, inner);
    }
    if (id == "cases") return cases();
    --pos_;
    error("unknown name '" + id + "'");
  }

  FuncExpr parenthesized() {
    expect_sym("(");
    FuncExpr e = expr();
    expect_sym(")");
    return e;
  }

  static FuncExpr apply(const FuncExpr& outer, const FuncExpr& inner) {
    return inner.op() == Op::Var ? outer : FuncExpr::compose(outer, inner);
  }

  FuncExpr cases() {
    expect_sym("{");
    std::vector<FuncExpr::Case> cs;
    while (true) {
      Guard g = guard();
      expect_sym(":");
      cs.push_back({g, expr()});
      if (is_sym(";")) {
        ++pos_;
        if (is_sym("}")) break;
        continue;
      }
      break;
    }
    expect_sym("}");
    return FuncExpr::piecewise(std::move(cs));
  }

  Guard guard() {
    if (is_ident("else")) {
      ++pos_;
      return Otherwise{};
    }
    if (is_ident("coset")) {
      ++pos_;
      expect_sym("(");
      const int n = small_int();
      expect_sym(",");
      const mpq_class l = rational();
      expect_sym(")");
      return CosetIs{n, l};
    }
    if (is_ident("val")) {
      ++pos_;
      expect_sym("(");
      ValuationIn g;
      const int first = small_int();
      if (is_ident("mod")) {
        ++pos_;
        g.residue = first;
        g.modulus = small_int();
        if (g.modulus < 1) error("valuation modulus must be positive");
      } else {
        g.values.push_back(first);
        while (is_sym(",")) {
          ++pos_;
          g.values.push_back(small_int());
        }
      }
      expect_sym(")");
      return g;
    }
    if (is_ident("ball")) {
      ++pos_;
      expect_sym("(");
      const mpq_class c = rational();
      expect_sym(",");
      const int r = small_int();
      expect_sym(")");
      return InBall{c, r};
    }
    error("expected a guard");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Binding strength of the printed form.
int prec_of(const FuncExpr& f) {
  switch (f.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::IntPow: return 3;
    default: return 4;
  }
}

std::string print(const FuncExpr& f, int need);

std::string wrap(const FuncExpr& f, int need) {
  const std::string s = print(f, need);
  return prec_of(f) < need ? "(" + s + ")" : s;
}

std::string print(const FuncExpr& f, int need) {
  const auto& n = f.node();
  switch (n.op) {
    case Op::RationalConst: {
      const std::string s = rational_to_string(n.value);
      return (n.value < 0 || n.value.get_den() != 1) ? "(" + s + ")" : s;
    }
    case Op::Var: return "x";
    case Op::Add: return wrap(n.args[0], 1) + " + " + wrap(n.args[1], 2);
    case Op::Sub: return wrap(n.args[0], 1) + " - " + wrap(n.args[1], 2);
    case Op::Mul: return wrap(n.args[0], 2) + " * " + wrap(n.args[1], 3);
    case Op::Div: return wrap(n.args[0], 2) + " / " + wrap(n.args[1], 3);
    case Op::IntPow: return wrap(n.args[0], 4) + "^" + std::to_string(n.integer);
    case Op::Compose: {
      const auto& outer = n.args[0].node();
      const std::string inner = print(n.args[1], 0);
      if (outer.op == Op::DigitSpread) return "spread" + std::to_string(outer.integer) + "(" + inner + ")";
      if (outer.op == Op::NthRootBranch) {
        return "root" + std::to_string(outer.integer) + "[" + outer.branch.get_str() + "](" + inner + ")";
      }
      return "compose(" + print(n.args[0], 0) + ", " + inner + ")";
    }
    case Op::Piecewise: {
      std::string s = "cases{";
      for (std::size_t i = 0; i < n.cases.size(); ++i) {
        if (i) s += "; ";
        s += to_string(n.cases[i].guard) + ": " + print(n.cases[i].expr, 0);
      }
      return s + "}";
    }
    case Op::DigitSpread: return "spread" + std::to_string(n.integer) + "(x)";
    case Op::NthRootBranch: return "root" + std::to_string(n.integer) + "[" + n.branch.get_str() + "](x)";
  }
  (void)need;
  return "?";
}

int int_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) fail(Errc::ParseError, std::string("missing integer '") + key + "'");
  return j[key].get<int>();
}

const nlohmann::json& single_tag(const nlohmann::json& j, std::string& tag) {
  if (!j.is_object() || j.size() != 1) fail(Errc::ParseError, "AST nodes are single-key objects, got " + j.dump());
  tag = j.begin().key();
  return j.begin().value();
}

}  // namespace

nlohmann::json rational_json(const mpq_class& q) {
  if (q.get_den() == 1 && q.get_num().fits_slong_p()) return q.get_num().get_si();
  return rational_to_string(q);
}

mpq_class rational_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return mpq_class(mpz_class(j.dump()));
  if (j.is_string()) return parse_rational(j.get<std::string>());
  fail(Errc::ParseError, "expected a rational, got " + j.dump());
}

FuncExpr parse_expr(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const FuncExpr& f) { return print(f, 0); }

std::string to_string(const Guard& g) {
  return std::visit(
      [](const auto& gg) -> std::string {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, CosetIs>) {
          return "coset(" + std::to_string(gg.n) + ", " + rational_to_string(gg.lambda) + ")";
        } else if constexpr (std::is_same_v<T, ValuationIn>) {
          if (gg.modulus > 0) return "val(" + std::to_string(gg.residue) + " mod " + std::to_string(gg.modulus) + ")";
          std::string s = "val(";
          for (std::size_t i = 0; i < gg.values.size(); ++i) s += (i ? ", " : "") + std::to_string(gg.values[i]);
          return s + ")";
        } else if constexpr (std::is_same_v<T, InBall>) {
          return "ball(" + rational_to_string(gg.center) + ", " + std::to_string(gg.radius) + ")";
        } else {
          return "else";
        }
      },
      g);
}

nlohmann::json to_json(const Guard& g) {
  return std::visit(
      [](const auto& gg) -> nlohmann::json {
        using T = std::decay_t<decltype(gg)>;
        if constexpr (std::is_same_v<T, CosetIs>) {
          return {{"CosetIs", {{"n", gg.n}, {"lambda", rational_json(gg.lambda)}}}};
        } else if constexpr (std::is_same_v<T, ValuationIn>) {
          if (gg.modulus > 0) return {{"ValuationIn", {{"modulus", gg.modulus}, {"residue", gg.residue}}}};
          return {{"ValuationIn", {{"values", gg.values}}}};
        } else if constexpr (std::is_same_v<T, InBall>) {
          return {{"InBall", {{"center", rational_json(gg.center)}, {"radius", gg.radius}}}};
        } else {
          return {{"Otherwise", nlohmann::json::object()}};
        }
      },
      g);
}

Guard guard_from_json(const nlohmann::json& j) {
  std::string tag;
  const auto& body = single_tag(j, tag);
  if (tag == "Otherwise") return Otherwise{};
  if (tag == "CosetIs") {
    if (!body.contains("lambda")) fail(Errc::ParseError, "CosetIs needs 'lambda'");
    return CosetIs{int_from_json(body, "n"), rational_from_json(body["lambda"])};
  }
  if (tag == "ValuationIn") {
    ValuationIn g;
    if (body.contains("modulus")) {
      g.modulus = int_from_json(body, "modulus");
      g.residue = body.contains("residue") ? int_from_json(body, "residue") : 0;
      if (g.modulus < 1) fail(Errc::ParseError, "valuation modulus must be positive");
    } else if (body.contains("values") && body["values"].is_array()) {
      for (const auto& v : body["values"]) {
        if (!v.is_number_integer()) fail(Errc::ParseError, "valuations must be integers");
        g.values.push_back(v.get<int>());
      }
    } else {
      fail(Errc::ParseError, "ValuationIn needs 'values' or 'modulus'");
    }
    return g;
  }
  if (tag == "InBall") {
    if (!body.contains("center")) fail(Errc::ParseError, "InBall needs 'center'");
    return InBall{rational_from_json(body["center"]), int_from_json(body, "radius")};
  }
  fail(Errc::ParseError, "unknown guard '" + tag + "'");
}

nlohmann::json to_json(const FuncExpr& f) {
  const auto& n = f.node();
  const std::string tag(op_name(n.op));
  switch (n.op) {
    case Op::RationalConst:
      return {{tag, {{"a", rational_json(mpq_class(n.value.get_num()))}, {"b", rational_json(mpq_class(n.value.get_den()))}}}};
    case Op::Var: return {{tag, nlohmann::json::object()}};
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return {{tag, nlohmann::json::array({to_json(n.args[0]), to_json(n.args[1])})}};
    case Op::IntPow: return {{tag, {{"base", to_json(n.args[0])}, {"exp", n.integer}}}};
    case Op::Compose: return {{tag, {{"outer", to_json(n.args[0])}, {"inner", to_json(n.args[1])}}}};
    case Op::Piecewise: {
      nlohmann::json cs = nlohmann::json::array();
      for (const auto& c : n.cases) cs.push_back({{"guard", to_json(c.guard)}, {"expr", to_json(c.expr)}});
      return {{tag, cs}};
    }
    case Op::DigitSpread: return {{tag, {{"d", n.integer}}}};
    case Op::NthRootBranch: {
      nlohmann::json b = n.branch.fits_slong_p() ? nlohmann::json(n.branch.get_si()) : nlohmann::json(n.branch.get_str());
      return {{tag, {{"n", n.integer}, {"branch", b}}}};
    }
  }
  return nullptr;
}

FuncExpr expr_from_json(const nlohmann::json& j) {
  std::string tag;
  const auto& body = single_tag(j, tag);
  auto pair = [&]() {
    if (!body.is_array() || body.size() != 2) fail(Errc::ParseError, tag + " takes two operands");
    return std::make_pair(expr_from_json(body[0]), expr_from_json(body[1]));
  };
  if (tag == "RationalConst") {
    if (body.is_object() && body.contains("a")) {
      const mpq_class a = rational_from_json(body["a"]);
      const mpq_class b = body.contains("b") ? rational_from_json(body["b"]) : mpq_class(1);
      if (b == 0) fail(Errc::ParseError, "zero denominator");
      return FuncExpr::constant(a / b);
    }
    return FuncExpr::constant(rational_from_json(body));
  }
  if (tag == "Var") return FuncExpr::var();
  if (tag == "Add") { auto [a, b] = pair(); return a + b; }
  if (tag == "Sub") { auto [a, b] = pair(); return a - b; }
  if (tag == "Mul") { auto [a, b] = pair(); return a * b; }
  if (tag == "Div") { auto [a, b] = pair(); return a / b; }
  if (tag == "IntPow") {
    if (!body.contains("base")) fail(Errc::ParseError, "IntPow needs 'base'");
    return FuncExpr::int_pow(expr_from_json(body["base"]), int_from_json(body, "exp"));
  }
  if (tag == "Compose") {
    if (!body.contains("outer") || !body.contains("inner")) fail(Errc::ParseError, "Compose needs 'outer' and 'inner'");
    return FuncExpr::compose(expr_from_json(body["outer"]), expr_from_json(body["inner"]));
  }
  if (tag == "Piecewise") {
    if (!body.is_array()) fail(Errc::ParseError, "Piecewise takes an array of cases");
    std::vector<FuncExpr::Case> cs;
    for (const auto& c : body) {
      if (!c.is_object() || !c.contains("guard") || !c.contains("expr")) {
        fail(Errc::ParseError, "Piecewise cases need 'guard' and 'expr'");
      }
      cs.push_back({guard_from_json(c["guard"]), expr_from_json(c["expr"])});
    }
    return FuncExpr::piecewise(std::move(cs));
  }
  if (tag == "DigitSpread") return FuncExpr::digit_spread(int_from_json(body, "d"));
  if (tag == "NthRootBranch") {
    if (!body.contains("branch")) fail(Errc::ParseError, "NthRootBranch needs 'branch'");
    const mpq_class b = rational_from_json(body["branch"]);
    if (b.get_den() != 1) fail(Errc::ParseError, "branch selector must be an integer");
    return FuncExpr::nth_root_branch(int_from_json(body, "n"), b.get_num());
  }
  fail(Errc::ParseError, "unknown node '" + tag + "'");
}

}  // namespace padic
