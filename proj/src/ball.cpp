#include "padic/ball.hpp"

#include <limits>

namespace padic {

namespace {

PadicNumber reduce_center(const PadicNumber& c, int r) {
  if (c.absolute_precision() < r) {
    fail(Errc::PrecisionExhausted, "ball center is not known modulo p^" + std::to_string(r));
  }
  return PadicNumber::from_residue(c.residue(r), c.prime(), r);
}

void check_same_prime(const Ball& a, const Ball& b) {
  if (a.prime() != b.prime()) fail(Errc::InvalidArgument, "balls over different primes");
}

}  // namespace

Ball::Ball(const PadicNumber& center, int radius_val) : center_(reduce_center(center, radius_val)), radius_(radius_val) {}

Ball::Ball(long p, const mpq_class& center, int radius_val)
    : center_(PadicNumber::from_residue(center, p, radius_val)), radius_(radius_val) {}

bool Ball::contains(const PadicNumber& x) const {
  if (x.prime() != prime()) fail(Errc::InvalidArgument, "point and ball over different primes");
  if (x.absolute_precision() < radius_) {
    const int k = x.absolute_precision();
    if (x.residue(k) != center_.residue(k)) return false;
    fail(Errc::IndistinguishableAtPrecision, "point known only mod p^" + std::to_string(k) +
                                                 ", ball radius is " + std::to_string(radius_));
  }
  return x.residue(radius_) == center_residue();
}

bool Ball::contains(const Ball& other) const {
  check_same_prime(*this, other);
  return other.radius_ >= radius_ && other.center_.residue(radius_) == center_residue();
}

bool Ball::disjoint(const Ball& other) const { return !contains(other) && !other.contains(*this); }

std::vector<Ball> Ball::children() const {
  std::vector<Ball> out;
  const long p = prime();
  const mpq_class base = center_residue();
  mpq_class step = radius_ >= 0 ? mpq_class(ipow(p, radius_)) : mpq_class(1) / mpq_class(ipow(p, -radius_));
  for (long j = 0; j < p; ++j) {
    out.emplace_back(p, base + step * j, radius_ + 1);
  }
  return out;
}

bool operator==(const Ball& a, const Ball& b) {
  return a.prime() == b.prime() && a.radius_ == b.radius_ && a.center_residue() == b.center_residue();
}

std::string Ball::to_string() const { return rational_to_string(center_residue()) + ":" + std::to_string(radius_); }

Ball parse_ball(const std::string& text, long p) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) fail(Errc::ParseError, "ball must be written c:r, got '" + text + "'");
  const mpq_class c = parse_rational(text.substr(0, colon));
  int r = 0;
  try {
    std::size_t used = 0;
    r = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail(Errc::ParseError, "malformed ball radius in '" + text + "'");
  }
  return Ball(p, c, r);
}

BallRelation relation(const Ball& a, const Ball& b) {
  check_same_prime(a, b);
  const bool ab = b.contains(a);
  const bool ba = a.contains(b);
  if (ab && ba) return BallRelation::Equal;
  if (ab) return BallRelation::FirstInsideSecond;
  if (ba) return BallRelation::SecondInsideFirst;
  return BallRelation::Disjoint;
}

namespace {

// v(x - y) as an integer, failing when the difference vanishes at the
// known precision.
int separation(const PadicNumber& x, const PadicNumber& y) {
  const PadicNumber d = x - y;
  if (d.is_zero()) {
    fail(Errc::IndistinguishableAtPrecision,
         "points agree to the known precision p^" + std::to_string(d.absolute_precision()));
  }
  return d.val();
}

}  // namespace

bool between(const PadicNumber& z, const PadicNumber& x, const PadicNumber& y) {
  const int r = separation(x, y);
  const PadicNumber d = z - x;
  if (d.is_zero()) {
    if (d.absolute_precision() >= r) return true;
    fail(Errc::IndistinguishableAtPrecision, "z - x is not known to valuation " + std::to_string(r));
  }
  return d.val() >= r;
}

Ball smallest_ball_containing(const PadicNumber& x, const PadicNumber& y) { return Ball(x, separation(x, y)); }

std::size_t ball_residue_count(const Ball& b, int k) {
  if (k < b.radius_val()) fail(Errc::InvalidArgument, "enumeration precision below ball radius");
  const mpz_class count = ipow(b.prime(), k - b.radius_val());
  if (count > mpz_class(std::numeric_limits<unsigned long>::max() / 2)) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(count.get_ui());
}

std::vector<PadicNumber> enumerate_ball(const Ball& b, int k, std::size_t cap) {
  const std::size_t count = ball_residue_count(b, k);
  if (count > cap) {
    fail(Errc::BudgetExceeded, "ball " + b.to_string() + " has " + ipow(b.prime(), k - b.radius_val()).get_str() +
                                   " residues mod p^" + std::to_string(k) + ", cap is " + std::to_string(cap));
  }
  const long p = b.prime();
  const int r = b.radius_val();
  const mpq_class base = b.center_residue();
  const mpq_class step = r >= 0 ? mpq_class(ipow(p, r)) : mpq_class(1) / mpq_class(ipow(p, -r));
  std::vector<PadicNumber> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    out.push_back(PadicNumber::from_residue(base + step * mpq_class(static_cast<unsigned long>(j)), p, k));
  }
  return out;
}

}  // namespace padic
