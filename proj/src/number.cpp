#include "padic/number.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>

namespace padic {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::PrecisionExhausted: return "PrecisionExhausted";
    case Errc::IndistinguishableAtPrecision: return "IndistinguishableAtPrecision";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::HenselConditionFailed: return "HenselConditionFailed";
    case Errc::InsufficientPrecision: return "InsufficientPrecision";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::GuardUndecidableAtPrecision: return "GuardUndecidableAtPrecision";
    case Errc::UnsupportedExpression: return "UnsupportedExpression";
    case Errc::PrecisionInsufficientForImage: return "PrecisionInsufficientForImage";
    case Errc::NotAContraction: return "NotAContraction";
    case Errc::MaxIterExceeded: return "MaxIterExceeded";
    case Errc::ZeroDerivative: return "ZeroDerivative";
    case Errc::NotInjectiveAtScale: return "NotInjectiveAtScale";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

int Valuation::value() const {
  if (!value_) fail(Errc::PrecisionExhausted, "valuation is +infinity at the known precision");
  return *value_;
}

std::string Valuation::to_string() const { return value_ ? std::to_string(*value_) : "+inf"; }

std::ostream& operator<<(std::ostream& os, const Valuation& v) { return os << v.to_string(); }

mpz_class ipow(long p, int e) {
  if (e < 0) fail(Errc::InvalidArgument, "negative exponent in ipow");
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
  return r;
}

int valuation_of(const mpz_class& z, long p, int cap) {
  if (z == 0) return cap;
  const auto up = static_cast<unsigned long>(p);
  if (p == 2) {
    auto bit = static_cast<int>(mpz_scan1(z.get_mpz_t(), 0));
    return std::min(bit, cap);
  }
  int count = 0;
  if (!mpz_divisible_ui_p(z.get_mpz_t(), up)) return 0;
  mpz_class t = z;
  while (count < cap && mpz_divisible_ui_p(t.get_mpz_t(), up)) {
    mpz_divexact_ui(t.get_mpz_t(), t.get_mpz_t(), up);
    ++count;
  }
  return count;
}

bool is_prime(long p) {
  if (p < 2) return false;
  for (long d = 2; d * d <= p; ++d) {
    if (p % d == 0) return false;
  }
  return true;
}

namespace {

mpz_class mod_nonneg(const mpz_class& a, const mpz_class& m) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

void require_prime(long p) {
  if (!is_prime(p)) fail(Errc::InvalidArgument, "p = " + std::to_string(p) + " is not prime");
}

// Strip p from a nonzero integer: returns exponent, divides in place.
int strip(mpz_class& z, long p) {
  int e = 0;
  const auto up = static_cast<unsigned long>(p);
  while (mpz_divisible_ui_p(z.get_mpz_t(), up)) {
    mpz_divexact_ui(z.get_mpz_t(), z.get_mpz_t(), up);
    ++e;
  }
  return e;
}

}  // namespace

PadicNumber PadicNumber::zero(long p, int abs_prec) {
  PadicNumber x;
  x.p_ = p;
  x.zero_ = true;
  x.v_ = abs_prec;
  x.n_ = 0;
  x.unit_ = 0;
  return x;
}

PadicNumber PadicNumber::from_unit(long p, int v, const mpz_class& unit, int rel_prec) {
  if (rel_prec < 1) fail(Errc::PrecisionExhausted, "relative precision must be at least 1");
  PadicNumber x;
  x.p_ = p;
  x.zero_ = false;
  x.v_ = v;
  x.n_ = rel_prec;
  x.unit_ = mod_nonneg(unit, ipow(p, rel_prec));
  if (mpz_divisible_ui_p(x.unit_.get_mpz_t(), static_cast<unsigned long>(p))) {
    fail(Errc::InvalidArgument, "unit part is divisible by p");
  }
  return x;
}

PadicNumber PadicNumber::from_integer(const mpz_class& a, long p, int rel_prec) {
  return from_rational(a, mpz_class(1), p, rel_prec);
}

PadicNumber PadicNumber::from_rational(const mpz_class& a, const mpz_class& b, long p, int rel_prec) {
  require_prime(p);
  if (b == 0) fail(Errc::DivisionByZero, "rational with zero denominator");
  if (rel_prec < 1) fail(Errc::InvalidArgument, "relative precision must be at least 1");
  if (a == 0) return zero(p, rel_prec);
  mpz_class num = a;
  mpz_class den = b;
  const int v = strip(num, p) - strip(den, p);
  const mpz_class mod = ipow(p, rel_prec);
  mpz_class inv;
  mpz_class den_mod = mod_nonneg(den, mod);
  mpz_invert(inv.get_mpz_t(), den_mod.get_mpz_t(), mod.get_mpz_t());
  return from_unit(p, v, mod_nonneg(num * inv, mod), rel_prec);
}

PadicNumber PadicNumber::from_rational(const mpq_class& q, long p, int rel_prec) {
  return from_rational(q.get_num(), q.get_den(), p, rel_prec);
}

PadicNumber PadicNumber::from_residue(const mpq_class& q, long p, int abs_prec) {
  require_prime(p);
  if (q == 0) return zero(p, abs_prec);
  mpz_class num = q.get_num();
  mpz_class den = q.get_den();
  const int v = strip(num, p) - strip(den, p);
  if (v >= abs_prec) return zero(p, abs_prec);
  return from_rational(q, p, abs_prec - v);
}

int PadicNumber::val() const { return valuation().value(); }

std::vector<long> PadicNumber::digits() const {
  std::vector<long> out;
  out.reserve(static_cast<std::size_t>(n_));
  mpz_class u = unit_;
  for (int i = 0; i < n_; ++i) {
    out.push_back(static_cast<long>(mpz_fdiv_q_ui(u.get_mpz_t(), u.get_mpz_t(), static_cast<unsigned long>(p_))));
  }
  return out;
}

mpq_class PadicNumber::residue(int k) const {
  if (k > absolute_precision()) {
    fail(Errc::PrecisionExhausted, "residue mod p^" + std::to_string(k) + " requested but value is only known mod p^" +
                                       std::to_string(absolute_precision()));
  }
  if (zero_ || k <= v_) return mpq_class(0);
  mpz_class u = mod_nonneg(unit_, ipow(p_, k - v_));
  mpq_class r(u);
  if (v_ >= 0) {
    r *= mpq_class(ipow(p_, v_));
  } else {
    r /= mpq_class(ipow(p_, -v_));
  }
  r.canonicalize();
  return r;
}

PadicNumber PadicNumber::truncated(int abs_prec) const {
  if (abs_prec > absolute_precision()) {
    fail(Errc::PrecisionExhausted, "cannot truncate to a higher precision than known");
  }
  if (zero_) return zero(p_, abs_prec);
  if (abs_prec <= v_) return zero(p_, abs_prec);
  if (abs_prec == absolute_precision()) return *this;
  return from_unit(p_, v_, unit_, abs_prec - v_);
}

PadicNumber PadicNumber::padded(int abs_prec) const {
  if (abs_prec <= absolute_precision()) return *this;
  if (zero_) return zero(p_, abs_prec);
  PadicNumber x = *this;
  x.n_ = abs_prec - v_;
  return x;
}

PadicNumber PadicNumber::lifted(int rel_prec) const {
  if (zero_) return zero(p_, v_ + rel_prec);
  return padded(v_ + rel_prec);
}

void PadicNumber::check_same_prime(const PadicNumber& other) const {
  if (p_ != other.p_) fail(Errc::InvalidArgument, "operands have different primes");
}

PadicNumber PadicNumber::operator-() const {
  if (zero_) return *this;
  PadicNumber x = *this;
  x.unit_ = ipow(p_, n_) - unit_;
  return x;
}

PadicNumber operator+(const PadicNumber& a, const PadicNumber& b) {
  a.check_same_prime(b);
  const long p = a.p_;
  const int abs = std::min(a.absolute_precision(), b.absolute_precision());
  if (a.zero_ && b.zero_) return PadicNumber::zero(p, abs);
  if (a.zero_) return b.truncated(abs);
  if (b.zero_) return a.truncated(abs);
  const int m = std::min(a.v_, b.v_);
  if (abs <= m) return PadicNumber::zero(p, abs);
  const mpz_class lhs = a.unit_ * ipow(p, a.v_ - m);
  const mpz_class rhs = b.unit_ * ipow(p, b.v_ - m);
  mpz_class s = mod_nonneg(lhs + rhs, ipow(p, abs - m));
  if (s == 0) return PadicNumber::zero(p, abs);
  const int t = strip(s, p);
  return PadicNumber::from_unit(p, m + t, s, abs - m - t);
}

PadicNumber operator-(const PadicNumber& a, const PadicNumber& b) { return a + (-b); }

PadicNumber operator*(const PadicNumber& a, const PadicNumber& b) {
  a.check_same_prime(b);
  const long p = a.p_;
  if (a.zero_ && b.zero_) return PadicNumber::zero(p, a.v_ + b.v_);
  if (a.zero_) return PadicNumber::zero(p, a.v_ + b.v_);
  if (b.zero_) return PadicNumber::zero(p, a.v_ + b.v_);
  const int n = std::min(a.n_, b.n_);
  return PadicNumber::from_unit(p, a.v_ + b.v_, a.unit_ * b.unit_, n);
}

PadicNumber PadicNumber::inverse() const {
  if (zero_) fail(Errc::DivisionByZero, "inverse of a value known only to be 0 mod p^" + std::to_string(v_));
  const mpz_class mod = ipow(p_, n_);
  mpz_class inv;
  mpz_invert(inv.get_mpz_t(), unit_.get_mpz_t(), mod.get_mpz_t());
  return from_unit(p_, -v_, inv, n_);
}

PadicNumber operator/(const PadicNumber& a, const PadicNumber& b) {
  a.check_same_prime(b);
  if (b.zero_) fail(Errc::DivisionByZero, "divisor is 0 mod p^" + std::to_string(b.v_));
  if (a.zero_) return PadicNumber::zero(a.p_, a.v_ - b.v_);
  return a * b.inverse();
}

PadicNumber PadicNumber::pow(int e) const {
  if (e == 0) {
    const int n = zero_ ? std::max(v_, 1) : n_;
    return from_unit(p_, 0, mpz_class(1), n);
  }
  if (e < 0) return inverse().pow(-e);
  PadicNumber base = *this;
  PadicNumber acc = base;
  int rest = e - 1;
  while (rest > 0) {
    if (rest & 1) acc = acc * base;
    rest >>= 1;
    if (rest > 0) base = base * base;
  }
  return acc;
}

bool operator==(const PadicNumber& a, const PadicNumber& b) {
  return a.p_ == b.p_ && a.zero_ == b.zero_ && a.v_ == b.v_ && a.n_ == b.n_ && a.unit_ == b.unit_;
}

bool PadicNumber::agrees_mod(const PadicNumber& other, int k) const {
  if (p_ != other.p_) return false;
  if (absolute_precision() < k || other.absolute_precision() < k) return false;
  return residue(k) == other.residue(k);
}

std::string PadicNumber::to_string() const {
  const std::string ps = std::to_string(p_);
  std::ostringstream os;
  if (zero_) {
    os << "O(" << ps << "^" << v_ << ")";
    return os.str();
  }
  os << ps << "^" << v_ << " * (";
  const auto ds = digits();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (i > 0) os << " + ";
    os << ds[i];
    if (i == 1) os << "*" << ps;
    if (i >= 2) os << "*" << ps << "^" << i;
  }
  os << ") + O(" << ps << "^" << (v_ + n_) << ")";
  return os.str();
}

std::string PadicNumber::to_short_string() const {
  std::ostringstream os;
  os << rational_to_string(representative()) << " + O(" << p_ << "^" << absolute_precision() << ")";
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const PadicNumber& x) { return os << x.to_string(); }

std::string rational_to_string(const mpq_class& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

mpq_class parse_rational(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) fail(Errc::ParseError, "empty rational");
  auto valid_int = [](const std::string& t) {
    std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (i >= t.size()) return false;
    return std::all_of(t.begin() + static_cast<std::ptrdiff_t>(i), t.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
  };
  const auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den)) fail(Errc::ParseError, "malformed rational '" + std::string(text) + "'");
  if (num[0] == '+') num.erase(0, 1);
  if (den[0] == '+') den.erase(0, 1);
  const mpz_class n{num}, d{den};
  if (d == 0) fail(Errc::ParseError, "zero denominator in '" + std::string(text) + "'");
  mpq_class q{n, d};
  q.canonicalize();
  return q;
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  void expect(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit) {
      fail(Errc::ParseError, "expected '" + std::string(lit) + "' at offset " + std::to_string(pos_));
    }
    pos_ += lit.size();
  }
  bool accept(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) == lit) {
      pos_ += lit.size();
      return true;
    }
    return false;
  }
  long integer() {
    std::size_t start = pos_;
    if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty() || tok == "-") fail(Errc::ParseError, "expected integer at offset " + std::to_string(start));
    try {
      return std::stol(tok);
    } catch (const std::exception&) {
      fail(Errc::ParseError, "integer out of range at offset " + std::to_string(start));
    }
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

int to_int(long v) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail(Errc::ParseError, "exponent out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

PadicNumber PadicNumber::parse(std::string_view text) {
  Cursor c(text);
  PadicNumber result;
  if (c.accept("O(")) {
    const long p = c.integer();
    c.expect("^");
    const int m = to_int(c.integer());
    c.expect(")");
    if (!c.done()) fail(Errc::ParseError, "trailing characters");
    require_prime(p);
    result = zero(p, m);
  } else {
    const long p = c.integer();
    require_prime(p);
    c.expect("^");
    const int v = to_int(c.integer());
    c.expect(" * (");
    std::vector<long> ds;
    for (;;) {
      ds.push_back(c.integer());
      if (ds.size() >= 2) {
        c.expect("*");
        const long base = c.integer();
        if (base != p) fail(Errc::ParseError, "digit term uses a different prime");
        if (ds.size() >= 3) {
          c.expect("^");
          if (c.integer() != static_cast<long>(ds.size()) - 1) fail(Errc::ParseError, "digit exponents out of order");
        }
      }
      if (!c.accept(" + ")) break;
    }
    c.expect(") + O(");
    if (c.integer() != p) fail(Errc::ParseError, "precision term uses a different prime");
    c.expect("^");
    const int abs = to_int(c.integer());
    c.expect(")");
    if (!c.done()) fail(Errc::ParseError, "trailing characters");
    const int n = static_cast<int>(ds.size());
    if (abs != v + n) fail(Errc::ParseError, "precision term does not match digit count");
    mpz_class unit = 0;
    for (int i = n - 1; i >= 0; --i) {
      const long d = ds[static_cast<std::size_t>(i)];
      if (d < 0 || d >= p) fail(Errc::ParseError, "digit out of range");
      unit = unit * p + d;
    }
    if (ds[0] == 0) fail(Errc::ParseError, "leading unit digit must be nonzero");
    result = from_unit(p, v, unit, n);
  }
  if (result.to_string() != text) fail(Errc::ParseError, "text is not in canonical form");
  return result;
}

}  // namespace padic
