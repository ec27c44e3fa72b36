#include "padic/cosets.hpp"

#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace padic {

Polynomial::Polynomial(std::vector<PadicNumber> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) fail(Errc::InvalidArgument, "polynomial needs at least one coefficient");
  for (const auto& c : coeffs_) {
    if (c.prime() != coeffs_.front().prime()) fail(Errc::InvalidArgument, "mixed primes in polynomial");
  }
}

Polynomial Polynomial::from_integers(const std::vector<long>& coeffs, long p, int rel_prec) {
  std::vector<PadicNumber> cs;
  cs.reserve(coeffs.size());
  for (long c : coeffs) cs.push_back(PadicNumber::from_integer(mpz_class(c), p, rel_prec));
  return Polynomial(std::move(cs));
}

PadicNumber Polynomial::operator()(const PadicNumber& x) const {
  PadicNumber acc = coeffs_.back();
  for (auto it = coeffs_.rbegin() + 1; it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  const long p = prime();
  if (coeffs_.size() == 1) return Polynomial({PadicNumber::zero(p, coeffs_.front().absolute_precision())});
  std::vector<PadicNumber> out;
  for (std::size_t i = 1; i < coeffs_.size(); ++i) {
    const int prec = std::max(1, coeffs_[i].relative_precision());
    out.push_back(coeffs_[i] * PadicNumber::from_integer(mpz_class(static_cast<unsigned long>(i)), p, prec + 8));
  }
  return Polynomial(std::move(out));
}

PadicNumber hensel_lift(const Polynomial& f, const PadicNumber& x0, int target_prec) {
  const Polynomial df = f.derivative();
  const PadicNumber fx0 = f(x0);
  const PadicNumber dfx0 = df(x0);
  if (dfx0.is_zero()) {
    fail(Errc::HenselConditionFailed, "f'(x0) vanishes at the known precision");
  }
  const int e = dfx0.val();
  const int fv = fx0.is_zero() ? fx0.absolute_precision() : fx0.val();
  if (fv <= 2 * e) {
    fail(Errc::HenselConditionFailed, "v(f(x0)) = " + std::to_string(fv) + " does not exceed 2 v(f'(x0)) = " +
                                          std::to_string(2 * e));
  }
  const int pad = target_prec + std::abs(e) + 2;
  PadicNumber z = x0.padded(pad);
  for (int iter = 0; iter < 256; ++iter) {
    const PadicNumber fz = f(z);
    const int reached = fz.is_zero() ? fz.absolute_precision() : fz.val();
    if (reached >= target_prec) {
      // The root agrees with z modulo p^(v(f(z)) - e).
      return z.truncated(std::min(z.absolute_precision(), reached - e));
    }
    if (fz.is_zero()) {
      fail(Errc::PrecisionExhausted, "coefficients are not known finely enough to reach p^" +
                                         std::to_string(target_prec));
    }
    z = (z - fz / df(z)).padded(pad);
  }
  fail(Errc::MaxIterExceeded, "Hensel iteration did not reach the target precision");
}

int hensel_exponent(long p, int n) {
  if (n < 1) fail(Errc::InvalidArgument, "n must be positive");
  int vn = 0;
  for (int t = n; t % p == 0; t /= static_cast<int>(p)) ++vn;
  return 2 * vn + 1;
}

namespace {

// Flags for unit residues mod p^m that are n-th powers of units. Built once
// per (p, n) and never modified afterwards.
std::shared_ptr<const std::vector<char>> nth_power_units(long p, int n) {
  static std::mutex mu;
  static std::map<std::pair<long, int>, std::shared_ptr<const std::vector<char>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{p, n}];
  if (slot) return slot;
  const int m = hensel_exponent(p, n);
  const mpz_class mod = ipow(p, m);
  if (mod > 50'000'000) fail(Errc::BudgetExceeded, "p^m too large for residue tables");
  const unsigned long size = mod.get_ui();
  auto flags = std::make_shared<std::vector<char>>(size, 0);
  mpz_class y;
  mpz_class r;
  for (unsigned long u = 1; u < size; ++u) {
    if (u % static_cast<unsigned long>(p) == 0) continue;
    y = u;
    mpz_powm_ui(r.get_mpz_t(), y.get_mpz_t(), static_cast<unsigned long>(n), mod.get_mpz_t());
    (*flags)[r.get_ui()] = 1;
  }
  slot = flags;
  return slot;
}

int floor_mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

bool is_nth_power(const PadicNumber& x, int n) {
  if (n < 1) fail(Errc::InvalidArgument, "n must be positive");
  if (x.is_zero()) fail(Errc::InsufficientPrecision, "value is 0 at the known precision");
  if (floor_mod(x.val(), n) != 0) return false;
  if (n == 1) return true;
  const long p = x.prime();
  const int m = hensel_exponent(p, n);
  if (x.relative_precision() < m) {
    fail(Errc::InsufficientPrecision, "need " + std::to_string(m) + " unit digits, have " +
                                          std::to_string(x.relative_precision()));
  }
  const mpz_class mod = ipow(p, m);
  const mpz_class u = x.unit() % mod;
  const auto flags = nth_power_units(p, n);
  if (!(*flags)[u.get_ui()]) return false;
  // Find the residue root and confirm it lifts.
  mpz_class r;
  for (unsigned long y = 1; y < mod.get_ui(); ++y) {
    if (y % static_cast<unsigned long>(p) == 0) continue;
    mpz_class yz(y);
    mpz_powm_ui(r.get_mpz_t(), yz.get_mpz_t(), static_cast<unsigned long>(n), mod.get_mpz_t());
    if (r != u) continue;
    std::vector<PadicNumber> cs(static_cast<std::size_t>(n) + 1, PadicNumber::zero(p, m + 2));
    cs.front() = -PadicNumber::from_unit(p, 0, x.unit(), x.relative_precision());
    cs.back() = PadicNumber::from_integer(1, p, x.relative_precision() + 2);
    hensel_lift(Polynomial(std::move(cs)), PadicNumber::from_integer(yz, p, m), m);
    return true;
  }
  return false;
}

std::size_t CosetTable::index_of(int valuation_mod_n, const mpz_class& unit_residue) const {
  const mpz_class u = ((unit_residue % modulus_) + modulus_) % modulus_;
  return static_cast<std::size_t>(valuation_mod_n) * unit_classes_ + unit_class_[u.get_ui()];
}

PadicNumber CosetTable::lambda(std::size_t index, int rel_prec) const {
  const auto& rep = reps_.at(index);
  return PadicNumber::from_unit(p_, rep.valuation, rep.unit, rel_prec);
}

CosetTable build_coset_table(long p, int n, std::size_t cap) {
  if (!is_prime(p)) fail(Errc::InvalidArgument, "p is not prime");
  if (n < 1) fail(Errc::InvalidArgument, "n must be positive");
  CosetTable t;
  t.p_ = p;
  t.n_ = n;
  t.m_ = hensel_exponent(p, n);
  t.modulus_ = ipow(p, t.m_);
  if (t.modulus_ > mpz_class(static_cast<unsigned long>(cap))) {
    fail(Errc::BudgetExceeded, "p^m = " + t.modulus_.get_str() + " exceeds the enumeration cap");
  }
  const unsigned long size = t.modulus_.get_ui();
  const auto flags = nth_power_units(p, n);
  std::vector<unsigned long> subgroup;
  for (unsigned long h = 1; h < size; ++h) {
    if ((*flags)[h]) subgroup.push_back(h);
  }
  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  t.unit_class_.assign(size, kUnassigned);
  std::vector<mpz_class> unit_reps;
  for (unsigned long u = 1; u < size; ++u) {
    if (u % static_cast<unsigned long>(p) == 0 || t.unit_class_[u] != kUnassigned) continue;
    const std::size_t cls = unit_reps.size();
    unit_reps.emplace_back(u);
    for (unsigned long h : subgroup) {
      // u * h < size^2 fits comfortably in 64 bits for any cap we accept.
      t.unit_class_[(u * h) % size] = cls;
    }
  }
  t.unit_classes_ = unit_reps.size();
  for (int i = 0; i < n; ++i) {
    for (const auto& u : unit_reps) t.reps_.push_back({i, u, ipow(p, i) * u});
  }
  return t;
}

const CosetTable& cached_coset_table(long p, int n) {
  static std::mutex mu;
  static std::map<std::pair<long, int>, std::unique_ptr<const CosetTable>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{p, n}];
  if (!slot) slot = std::make_unique<const CosetTable>(build_coset_table(p, n));
  return *slot;
}

CosetLabel classify(const PadicNumber& x, const CosetTable& table) {
  if (x.prime() != table.prime()) fail(Errc::InvalidArgument, "value and table over different primes");
  if (x.is_zero()) fail(Errc::InsufficientPrecision, "value is 0 at the known precision");
  if (x.relative_precision() < table.hensel_m()) {
    fail(Errc::InsufficientPrecision, "need " + std::to_string(table.hensel_m()) + " unit digits, have " +
                                          std::to_string(x.relative_precision()));
  }
  return {&table, table.index_of(floor_mod(x.val(), table.exponent()), x.unit())};
}

nlohmann::json to_json(const CosetTable& table) {
  nlohmann::json reps = nlohmann::json::array();
  nlohmann::json detail = nlohmann::json::array();
  for (const auto& r : table.representatives()) {
    const mpz_class& v = r.value;
    if (v.fits_slong_p()) {
      reps.push_back(v.get_si());
    } else {
      reps.push_back(v.get_str());
    }
    detail.push_back({{"valuation", r.valuation}, {"unit", r.unit.get_str()}});
  }
  return {{"prime", table.prime()},
          {"n", table.exponent()},
          {"hensel_m", table.hensel_m()},
          {"index", table.size()},
          {"representatives", reps},
          {"representative_parts", detail}};
}

}  // namespace padic
