#include "padic/calculus.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace padic {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "Converged";
    case Verdict::Unbounded: return "Unbounded";
    case Verdict::DirectionalDisagreement: return "DirectionalDisagreement";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

std::string_view point_kind_name(PointKind k) {
  switch (k) {
    case PointKind::Differentiable: return "Differentiable";
    case PointKind::InS: return "InS_n";
    case PointKind::InT: return "InT_n";
    case PointKind::Undetermined: return "Undetermined";
  }
  return "?";
}

PadicNumber difference_quotient(const FuncExpr& f, const PadicNumber& x, const PadicNumber& y,
                                const EvalOptions& opts) {
  const PadicNumber dx = x - y;
  if (dx.is_zero()) {
    fail(Errc::IndistinguishableAtPrecision, "x - y vanishes modulo p^" + std::to_string(dx.absolute_precision()));
  }
  return (eval(f, x, opts) - eval(f, y, opts)) / dx;
}

namespace {

constexpr int kMaxPrecisionRetries = 3;

mpq_class pow_q(long p, int e) {
  return e >= 0 ? mpq_class(ipow(p, e)) : mpq_class(1) / mpq_class(ipow(p, -e));
}

unsigned long checked_count(long p, int s) {
  if (s < 1) fail(Errc::InvalidArgument, "s must be positive");
  const mpz_class c = ipow(p, s);
  if (c > mpz_class(1UL << 40)) fail(Errc::BudgetExceeded, "p^s is too large to index points");
  return c.get_ui();
}

void check_options(const ScaleOptions& o) {
  if (o.jmax < o.j0) fail(Errc::InvalidArgument, "jmax must be at least j0");
  if (o.sample_points < 2) fail(Errc::InvalidArgument, "need at least two sample points");
}

PadicNumber value_at(const FuncExpr& f, const mpq_class& x, long p, int prec) {
  try {
    return eval_exact(f, x, p, {prec}).value;
  } catch (const PadicError& e) {
    if (e.code() == Errc::DivisionByZero || e.code() == Errc::OutOfDomain) {
      fail(Errc::OutOfDomain, "f is undefined at " + rational_to_string(x) + " (" + e.what() + ")");
    }
    throw;
  }
}

// Residues of values sharing one modulus, scaled to integers so valuations
// of differences are cheap.
class ScaledResidues {
 public:
  ScaledResidues(const std::vector<PadicNumber>& xs, long p) : p_(p) {
    cap_ = xs.front().absolute_precision();
    for (const auto& x : xs) cap_ = std::min(cap_, x.absolute_precision());
    shift_ = std::min(0, cap_);
    for (const auto& x : xs) {
      if (!x.is_zero()) shift_ = std::min(shift_, x.val());
    }
    const mpq_class scale = pow_q(p, -shift_);
    r_.reserve(xs.size());
    for (const auto& x : xs) {
      const mpq_class q = x.residue(cap_) * scale;
      r_.push_back(q.get_num());
    }
  }

  int cap() const { return cap_; }

  // v(x_i - x_k), or {cap, true} when the difference vanishes at precision.
  std::pair<int, bool> vdiff(std::size_t i, std::size_t k) const {
    tmp_ = r_[i] - r_[k];
    if (tmp_ == 0) return {cap_, true};
    const int v = valuation_of(tmp_, p_, cap_ - shift_) + shift_;
    return v >= cap_ ? std::make_pair(cap_, true) : std::make_pair(v, false);
  }

 private:
  long p_;
  int cap_ = 0;
  int shift_ = 0;
  std::vector<mpz_class> r_;
  mutable mpz_class tmp_;
};

std::vector<int> small_valuations(long p, unsigned long count) {
  std::vector<int> v(count, 0);
  for (unsigned long i = 1; i < count; ++i) {
    unsigned long t = i;
    int c = 0;
    while (t % static_cast<unsigned long>(p) == 0) {
      t /= static_cast<unsigned long>(p);
      ++c;
    }
    v[i] = c;
  }
  return v;
}

std::uint64_t mix_seed(std::uint64_t seed, int j, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(j + 1000), static_cast<std::uint32_t>(salt),
                    static_cast<std::uint32_t>(salt >> 32)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

// Distinct indices in [0, count), always containing `forced`, sorted.
std::vector<unsigned long> sample_indices(unsigned long count, std::size_t m, std::uint64_t seed,
                                          const std::vector<unsigned long>& forced,
                                          const std::vector<char>* allowed = nullptr) {
  std::vector<unsigned long> out(forced.begin(), forced.end());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<unsigned long> dist(0, count - 1);
  std::size_t guard = 0;
  while (out.size() < m && guard++ < 64 * m) {
    const unsigned long i = dist(rng);
    if (allowed && !(*allowed)[i % allowed->size()]) continue;
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void finish_verdict(DiffEstimate& d, const std::optional<PadicNumber>& qref) {
  const auto& sc = d.scales;
  const std::size_t n = sc.size();
  if (n >= 2 && qref && sc[n - 1].agreement >= d.s && sc[n - 2].agreement >= d.s) {
    int cs = std::min(sc[n - 1].agreement, sc[n - 2].agreement);
    cs = std::min(cs, qref->absolute_precision());
    if (cs >= d.s) {
      d.verdict = Verdict::Converged;
      d.certified_scale = cs;
      d.df = qref->truncated(cs);
      return;
    }
  }
  if (n >= 3) {
    const auto& a = sc[n - 3].min_quotient_val;
    const auto& b = sc[n - 2].min_quotient_val;
    const auto& c = sc[n - 1].min_quotient_val;
    if (a && b && c && *b < *a && *c < *b) {
      d.verdict = Verdict::Unbounded;
      return;
    }
  }
  d.verdict = Verdict::Undetermined;
}

bool precision_limited(const DiffEstimate& d) {
  if (d.verdict != Verdict::Undetermined) return false;
  for (const auto& s : d.scales) {
    if (s.agreement_lower_bound && s.agreement < d.s) return true;
  }
  return false;
}

DiffEstimate strict_once(const FuncExpr& f, const mpq_class& a, long p, const ScaleOptions& o, int prec) {
  DiffEstimate d;
  d.prime = p;
  d.point = a;
  d.j0 = o.j0;
  d.jmax = o.jmax;
  d.s = o.s;
  d.seed = o.seed;
  d.precision = prec;
  const unsigned long count = checked_count(p, o.s);
  const std::vector<int> vsmall = small_valuations(p, count);
  const PadicNumber fa = value_at(f, a, p, prec);

  // Reference quotient on the finest scale.
  const mpq_class href = pow_q(p, o.jmax);
  const PadicNumber qref = (value_at(f, a + href, p, prec) - fa) / PadicNumber::from_rational(href, p, prec);

  const double total_pairs = 0.5 * static_cast<double>(count) * static_cast<double>(count - 1);
  const bool exhaustive = total_pairs <= static_cast<double>(o.budget);
  d.exhaustive = exhaustive;
  for (int j = o.j0; j <= o.jmax; ++j) {
    const mpq_class h = pow_q(p, j);
    std::vector<unsigned long> idx;
    if (exhaustive) {
      idx.resize(count);
      for (unsigned long i = 0; i < count; ++i) idx[i] = i;
    } else {
      idx = sample_indices(count, std::min<std::size_t>(o.sample_points, count), mix_seed(o.seed, j, 0), {0, 1});
    }
    std::vector<PadicNumber> fv, gv;
    fv.reserve(idx.size());
    gv.reserve(idx.size());
    for (unsigned long i : idx) {
      const mpq_class off = h * static_cast<long>(i);
      const PadicNumber fi = i == 0 ? fa : value_at(f, a + off, p, prec);
      fv.push_back(fi);
      // g_i = f_i - Qref * (x_i - a); differences of g measure q - Qref.
      gv.push_back(i == 0 ? fi : fi - qref * PadicNumber::from_rational(off, p, prec));
    }
    const ScaledResidues fs(fv, p), gs(gv, p);
    ScaleSummary sum;
    sum.j = j;
    sum.points = idx.size();
    sum.exhaustive = exhaustive;
    sum.agreement = std::numeric_limits<int>::max();
    if (exhaustive) {
      // Pairs with v(i - i') = t live in one class mod p^t. Truncated valuations
      // are ultrametric with a common cap, so the class minimum is reached
      // against its first member, and by a pair straddling two subclasses.
      unsigned long stride = 1;
      for (int t = 0; t < o.s; ++t, stride *= static_cast<unsigned long>(p)) {
        for (unsigned long c0 = 0; c0 < stride; ++c0) {
          int gmin = std::numeric_limits<int>::max(), fmin = gmin;
          bool fcapped = true;
          for (unsigned long w = c0 + stride; w < count; w += stride) {
            gmin = std::min(gmin, gs.vdiff(c0, w).first);
            const auto [fvv, fcap] = fs.vdiff(c0, w);
            if (fvv < fmin) {
              fmin = fvv;
              fcapped = fcap;
            }
          }
          if (gmin == std::numeric_limits<int>::max()) continue;
          const int agr = gmin - j - t;
          const bool gcap = gmin >= gs.cap();
          if (agr < sum.agreement || (agr == sum.agreement && gcap)) {
            sum.agreement = agr;
            sum.agreement_lower_bound = gcap;
          }
          if (!fcapped && (!sum.min_quotient_val || fmin - j - t < *sum.min_quotient_val)) {
            sum.min_quotient_val = fmin - j - t;
          }
        }
      }
      sum.pairs = static_cast<std::size_t>(total_pairs);
      d.scales.push_back(sum);
      continue;
    }
    for (std::size_t u = 0; u < idx.size(); ++u) {
      for (std::size_t w = u + 1; w < idx.size(); ++w) {
        const int dv = j + vsmall[idx[w] - idx[u]];
        const auto [ga, gcap] = gs.vdiff(u, w);
        const int agr = ga - dv;
        if (agr < sum.agreement || (agr == sum.agreement && gcap)) {
          sum.agreement = agr;
          sum.agreement_lower_bound = gcap;
        }
        const auto [fvv, fcap] = fs.vdiff(u, w);
        if (!fcap) {
          const int qv = fvv - dv;
          if (!sum.min_quotient_val || qv < *sum.min_quotient_val) sum.min_quotient_val = qv;
        }
        ++sum.pairs;
      }
    }
    d.scales.push_back(sum);
  }
  finish_verdict(d, qref);
  return d;
}

int auto_precision(const ScaleOptions& o) { return o.jmax + 2 * o.s + 8; }

template <typename Fn>
DiffEstimate with_retries(const ScaleOptions& o, Fn run) {
  int prec = o.precision > 0 ? o.precision : auto_precision(o);
  DiffEstimate d = run(prec);
  if (o.precision > 0) return d;
  for (int t = 0; t < kMaxPrecisionRetries && precision_limited(d); ++t) {
    prec += 2 * o.s + 8;
    d = run(prec);
  }
  return d;
}

DiffEstimate directional_once(const FuncExpr& f, const mpq_class& a, long p, int n, const mpq_class& lambda,
                              const ScaleOptions& o, int prec) {
  DiffEstimate d;
  d.prime = p;
  d.point = a;
  d.j0 = o.j0;
  d.jmax = o.jmax;
  d.s = o.s;
  d.seed = o.seed;
  d.precision = prec;
  const unsigned long count = checked_count(p, o.s);
  const unsigned long units = count - count / static_cast<unsigned long>(p);
  const bool exhaustive = units <= o.budget;
  d.exhaustive = exhaustive;
  const PadicNumber fa = value_at(f, a, p, prec);
  auto quotient = [&](int j, unsigned long u) {
    mpq_class w = pow_q(p, j) * static_cast<long>(u);
    mpq_class t = lambda;
    for (int i = 0; i < n; ++i) t *= w;
    return (value_at(f, a + t, p, prec) - fa) / PadicNumber::from_rational(t, p, prec);
  };
  const PadicNumber qref = quotient(o.jmax, 1);
  std::vector<char> is_unit(static_cast<std::size_t>(p), 1);
  is_unit[0] = 0;
  for (int j = o.j0; j <= o.jmax; ++j) {
    std::vector<unsigned long> us;
    if (exhaustive) {
      for (unsigned long u = 1; u < count; ++u) {
        if (u % static_cast<unsigned long>(p) != 0) us.push_back(u);
      }
    } else {
      us = sample_indices(count, std::min<std::size_t>(o.sample_points, units), mix_seed(o.seed, j, 1 + n), {1},
                          &is_unit);
    }
    ScaleSummary sum;
    sum.j = j;
    sum.points = us.size() + 1;
    sum.pairs = us.size();
    sum.exhaustive = exhaustive;
    sum.agreement = std::numeric_limits<int>::max();
    for (unsigned long u : us) {
      const PadicNumber q = quotient(j, u);
      const PadicNumber diff = q - qref;
      const int agr = diff.is_zero() ? diff.absolute_precision() : diff.val();
      if (agr < sum.agreement || (agr == sum.agreement && diff.is_zero())) {
        sum.agreement = agr;
        sum.agreement_lower_bound = diff.is_zero();
      }
      if (!q.is_zero() && (!sum.min_quotient_val || q.val() < *sum.min_quotient_val)) sum.min_quotient_val = q.val();
    }
    d.scales.push_back(sum);
  }
  finish_verdict(d, qref);
  return d;
}

}  // namespace

DiffEstimate strict_derivative(const FuncExpr& f, const mpq_class& a, long p, const ScaleOptions& opts) {
  check_options(opts);
  return with_retries(opts, [&](int prec) { return strict_once(f, a, p, opts, prec); });
}

DiffEstimate strict_derivative(const FuncExpr& f, const PadicNumber& a, const ScaleOptions& opts) {
  return strict_derivative(f, a.representative(), a.prime(), opts);
}

DiffEstimate directional_derivative(const FuncExpr& f, const mpq_class& a, long p, int n, const mpq_class& lambda,
                                    const ScaleOptions& opts) {
  check_options(opts);
  if (n < 1) fail(Errc::InvalidArgument, "n must be positive");
  if (lambda == 0) fail(Errc::InvalidArgument, "lambda must be nonzero");
  return with_retries(opts, [&](int prec) { return directional_once(f, a, p, n, lambda, opts, prec); });
}

DiffEstimate directional_derivative(const FuncExpr& f, const mpq_class& a, int n, const CosetLabel& lambda,
                                    const ScaleOptions& opts) {
  return directional_derivative(f, a, lambda.table->prime(), n, mpq_class(lambda.representative().value), opts);
}

DirectionalReport directional_report(const FuncExpr& f, const mpq_class& a, long p, int n, const ScaleOptions& opts) {
  const CosetTable& table = cached_coset_table(p, n);
  DirectionalReport r;
  r.prime = p;
  r.point = a;
  r.n = n;
  for (std::size_t i = 0; i < table.size(); ++i) {
    r.lambdas.push_back(table.representatives()[i]);
    r.estimates.push_back(directional_derivative(f, a, n, CosetLabel{&table, i}, opts));
  }
  return r;
}

PointClassification classify_point(const FuncExpr& f, const mpq_class& a, long p, int n, const ScaleOptions& opts) {
  PointClassification c;
  c.report = directional_report(f, a, p, n, opts);
  c.summary.prime = p;
  c.summary.point = a;
  c.summary.j0 = opts.j0;
  c.summary.jmax = opts.jmax;
  c.summary.s = opts.s;
  c.summary.seed = opts.seed;
  const auto& est = c.report.estimates;
  const bool any_unbounded =
      std::any_of(est.begin(), est.end(), [](const DiffEstimate& d) { return d.verdict == Verdict::Unbounded; });
  if (any_unbounded) {
    c.kind = PointKind::InT;
    c.summary.verdict = Verdict::Unbounded;
    return c;
  }
  const bool all_converged =
      std::all_of(est.begin(), est.end(), [](const DiffEstimate& d) { return d.verdict == Verdict::Converged; });
  if (!all_converged) return c;
  for (std::size_t i = 0; i < est.size(); ++i) c.summary.directional.emplace_back(c.report.lambdas[i].value, *est[i].df);
  bool disagree = false;
  for (const auto& e : est) disagree |= !e.df->agrees_mod(*est.front().df, opts.s);
  if (disagree) {
    c.kind = PointKind::InS;
    c.summary.verdict = Verdict::DirectionalDisagreement;
    return c;
  }
  c.strict = strict_derivative(f, a, p, opts);
  if (c.strict->verdict == Verdict::Converged && c.strict->df->agrees_mod(*est.front().df, opts.s)) {
    c.kind = PointKind::Differentiable;
    c.df = c.strict->df;
    c.summary.verdict = Verdict::Converged;
    c.summary.df = c.df;
    c.summary.certified_scale = c.strict->certified_scale;
  }
  return c;
}

bool bounded_quotients(const FuncExpr& f, const mpq_class& a, long p, const ScaleOptions& opts, int n) {
  const DirectionalReport r = directional_report(f, a, p, n, opts);
  return std::none_of(r.estimates.begin(), r.estimates.end(),
                      [](const DiffEstimate& d) { return d.verdict == Verdict::Unbounded; });
}

nlohmann::json padic_json(const PadicNumber& x) {
  nlohmann::json j{{"value", x.to_short_string()}, {"text", x.to_string()}, {"abs_precision", x.absolute_precision()}};
  if (x.is_zero()) {
    j["valuation"] = nullptr;
    j["digits"] = nlohmann::json::array();
  } else {
    j["valuation"] = x.val();
    j["digits"] = x.digits();
  }
  return j;
}

nlohmann::json to_json(const DiffEstimate& d) {
  nlohmann::json scales = nlohmann::json::array();
  for (const auto& s : d.scales) {
    scales.push_back({{"j", s.j},
                      {"points", s.points},
                      {"pairs", s.pairs},
                      {"exhaustive", s.exhaustive},
                      {"agreement", s.agreement},
                      {"agreement_lower_bound", s.agreement_lower_bound},
                      {"min_quotient_valuation", s.min_quotient_val ? nlohmann::json(*s.min_quotient_val) : nullptr}});
  }
  nlohmann::json j{{"prime", d.prime},
                   {"point", rational_json(d.point)},
                   {"j0", d.j0},
                   {"jmax", d.jmax},
                   {"s", d.s},
                   {"verdict", verdict_name(d.verdict)},
                   {"certified_scale", d.certified_scale},
                   {"exhaustive", d.exhaustive},
                   {"seed", d.seed},
                   {"precision", d.precision},
                   {"scales", scales}};
  j["df"] = d.df ? padic_json(*d.df) : nlohmann::json(nullptr);
  if (!d.directional.empty()) {
    nlohmann::json dir = nlohmann::json::array();
    for (const auto& [l, v] : d.directional) dir.push_back({{"lambda", l.get_str()}, {"value", padic_json(v)}});
    j["directional"] = dir;
  }
  return j;
}

nlohmann::json to_json(const DirectionalReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
    per.push_back({{"lambda", r.lambdas[i].value.get_str()}, {"estimate", to_json(r.estimates[i])}});
  }
  return {{"prime", r.prime}, {"point", rational_json(r.point)}, {"n", r.n}, {"directions", per}};
}

nlohmann::json to_json(const PointClassification& c) {
  nlohmann::json j{{"classification", point_kind_name(c.kind)},
                   {"summary", to_json(c.summary)},
                   {"directional", to_json(c.report)}};
  j["df"] = c.df ? padic_json(*c.df) : nlohmann::json(nullptr);
  j["strict"] = c.strict ? to_json(*c.strict) : nlohmann::json(nullptr);
  return j;
}

}  // namespace padic
