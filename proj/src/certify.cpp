#include "padic/certify.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

namespace padic {

std::string_view tag_name(PartitionTag t) {
  switch (t) {
    case PartitionTag::U: return "U";
    case PartitionTag::V: return "V";
    case PartitionTag::I: return "I";
  }
  return "?";
}

namespace {

constexpr int kEvalRetries = 3;
constexpr int kWindowShifts = 2;

mpq_class pow_q(long p, int e) {
  return e >= 0 ? mpq_class(ipow(p, e)) : mpq_class(1) / mpq_class(ipow(p, -e));
}

int val_q(const mpq_class& q, long p) {
  return valuation_of(q.get_num(), p, std::numeric_limits<int>::max()) -
         valuation_of(q.get_den(), p, std::numeric_limits<int>::max());
}

// f(x) known at least modulo p^need.
PadicNumber value_abs(const FuncExpr& f, const mpq_class& x, long p, int need) {
  int w = std::max(need, 1) + 8;
  for (int t = 0; t <= kEvalRetries; ++t) {
    PadicNumber v = [&] {
      try {
        return eval_exact(f, x, p, {w}).value;
      } catch (const PadicError& e) {
        if (e.code() == Errc::DivisionByZero || e.code() == Errc::OutOfDomain) {
          fail(Errc::OutOfDomain, "f is undefined at " + rational_to_string(x) + " (" + e.what() + ")");
        }
        throw;
      }
    }();
    if (v.absolute_precision() >= need) return v;
    w += need - v.absolute_precision() + 8;
  }
  fail(Errc::InsufficientPrecision, "f(" + rational_to_string(x) + ") is not known modulo p^" + std::to_string(need));
}

// x_t = c + p^r t for 0 <= t < p^(k - r).
struct Grid {
  long p;
  mpq_class c;
  int r;
  int k;
  unsigned long n;
  std::vector<int> vt;  // v_p(t), vt[0] unused

  Grid(const Ball& b, int k_, std::size_t budget) : p(b.prime()), c(b.center_residue()), r(b.radius_val()), k(k_) {
    if (k <= r) fail(Errc::InvalidArgument, "precision k must exceed the ball radius");
    const mpz_class count = ipow(p, k - r);
    if (count > mpz_class(static_cast<unsigned long>(budget))) {
      fail(Errc::BudgetExceeded, "ball has " + count.get_str() + " residues mod p^" + std::to_string(k));
    }
    n = count.get_ui();
    vt.assign(n, 0);
    for (unsigned long t = 1; t < n; ++t) {
      unsigned long u = t;
      while (u % static_cast<unsigned long>(p) == 0) {
        u /= static_cast<unsigned long>(p);
        ++vt[t];
      }
    }
  }

  mpq_class point(unsigned long t) const { return c + pow_q(p, r) * static_cast<long>(t); }
  int vdx(unsigned long a, unsigned long b) const { return r + vt[a > b ? a - b : b - a]; }
  unsigned long modulus(int level) const { return ipow(p, level - r).get_ui(); }
};

std::vector<unsigned long> spot_indices(unsigned long n, std::size_t m, std::uint64_t seed) {
  std::vector<unsigned long> out;
  if (n <= 1) return out;
  m = std::min<std::size_t>(m, n - 1);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<unsigned long> dist(1, n - 1);
  while (out.size() < m) {
    const unsigned long t = dist(rng);
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PairWitness make_witness(const Grid& g, const std::vector<PadicNumber>& d, int e, unsigned long a, unsigned long b) {
  PairWitness w;
  w.x = g.point(a);
  w.y = g.point(b);
  w.v_dx = g.vdx(a, b);
  const PadicNumber df = d[a] - d[b];
  const int cap = g.k + e;
  w.v_df = df.is_zero() ? df.absolute_precision() : df.val();
  w.v_df_lower_bound = w.v_df >= cap;
  w.v_df = std::min(w.v_df, cap);
  return w;
}

// Check (d) level by level. At each level m in [r, k] the map
// (x mod p^m) -> (f(x) mod p^(m+e)) must be well defined and injective.
std::optional<PairWitness> isometry_witness(const Grid& g, const std::vector<PadicNumber>& d, int e) {
  for (int m = g.k; m >= g.r; --m) {
    const unsigned long mod = g.modulus(m);
    std::vector<mpq_class> key(g.n);
    for (unsigned long t = 0; t < g.n; ++t) key[t] = d[t].residue(m + e);
    std::map<mpq_class, unsigned long> first_of_key;
    std::unordered_map<unsigned long, unsigned long> first_of_class;
    // Prefer the widest separated pair, then a pair whose values coincide.
    std::optional<PairWitness> best;
    for (unsigned long t = 0; t < g.n; ++t) {
      const unsigned long cls = t % mod;
      const auto [ci, cnew] = first_of_class.try_emplace(cls, t);
      if (!cnew && key[ci->second] != key[t]) return make_witness(g, d, e, ci->second, t);
      const auto [ki, knew] = first_of_key.try_emplace(key[t], t);
      if (!knew && ki->second % mod != cls) {
        PairWitness w = make_witness(g, d, e, ki->second, t);
        if (!best || w.v_dx < best->v_dx || (w.v_dx == best->v_dx && w.v_df_lower_bound && !best->v_df_lower_bound)) {
          best = std::move(w);
        }
        if (best->v_dx == g.r && best->v_df_lower_bound) break;
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

ScaleOptions window_for(const Ball& b, const CertifyOptions& opts) {
  ScaleOptions o;
  o.s = opts.s;
  o.j0 = std::max(b.radius_val(), 0) + opts.s;
  o.jmax = o.j0 + 3;
  o.budget = opts.derivative_budget;
  o.seed = opts.seed;
  return o;
}

// Strict derivative, moving the window deeper while the verdict is open.
DiffEstimate estimate_at(const FuncExpr& f, const mpq_class& a, const Ball& b, const CertifyOptions& opts) {
  ScaleOptions o = window_for(b, opts);
  DiffEstimate d = strict_derivative(f, a, b.prime(), o);
  for (int t = 0; t < kWindowShifts && d.verdict == Verdict::Undetermined; ++t) {
    o.j0 += opts.s;
    o.jmax += opts.s;
    d = strict_derivative(f, a, b.prime(), o);
  }
  return d;
}

std::optional<int> norm_of(const DiffEstimate& d) {
  if (d.verdict != Verdict::Converged || d.df->is_zero()) return std::nullopt;
  return d.df->val();
}

}  // namespace

SolveResult local_solve(const FuncExpr& f, const PadicNumber& a, const PadicNumber& df_a, const PadicNumber& c,
                        int tol_exponent, int max_iter, std::optional<int> radius) {
  const long p = a.prime();
  if (df_a.is_zero()) fail(Errc::ZeroDerivative, "Df(a) vanishes at the known precision");
  if (c.absolute_precision() < tol_exponent) {
    fail(Errc::InsufficientPrecision, "target is only known mod p^" + std::to_string(c.absolute_precision()));
  }
  const int ev = df_a.val();
  const int keep = tol_exponent - ev + 4;
  const mpq_class a0 = a.representative();
  mpq_class x = a0;
  int rad = 0;
  std::vector<SolveStep> log;
  std::optional<int> last_step;
  for (int i = 0;; ++i) {
    const PadicNumber res = value_abs(f, x, p, tol_exponent) - c;
    const int rv = res.is_zero() ? res.absolute_precision() : res.val();
    if (i == 0) rad = radius ? *radius : rv - ev;
    log.push_back({i, x, last_step, std::min(rv, tol_exponent)});
    if (rv >= tol_exponent) return {PadicNumber::from_residue(x, p, tol_exponent - ev), rad, i, std::move(log)};
    if (i >= max_iter) fail(Errc::MaxIterExceeded, "no convergence after " + std::to_string(max_iter) + " steps");
    const PadicNumber step = res / df_a;
    if (step.is_zero()) fail(Errc::InsufficientPrecision, "step vanished before the tolerance was reached");
    const mpq_class dx = step.representative();
    const int sv = val_q(dx, p);
    if (last_step && sv <= *last_step) {
      fail(Errc::NotAContraction, "step valuation " + std::to_string(sv) + " after " + std::to_string(*last_step));
    }
    x = PadicNumber::from_residue(x - dx, p, keep).representative();
    if (x != a0 && val_q(x - a0, p) < rad) {
      fail(Errc::NotAContraction, "iterate " + rational_to_string(x) + " left Ball(a, " + std::to_string(rad) + ")");
    }
    last_step = sv;
  }
}

Ball local_image_ball(const FuncExpr& f, const Ball& b, int k, const CertifyOptions& opts) {
  const long p = b.prime();
  const int r = b.radius_val();
  const mpq_class c0 = b.center_residue();
  const DiffEstimate d = estimate_at(f, c0, b, opts);
  const auto e = norm_of(d);
  if (!e) fail(Errc::ZeroDerivative, "Df vanishes at the center at the certified scale");
  const PadicNumber fc = value_abs(f, c0, p, k + *e);
  const Ball image(fc, r + *e);
  const int w = std::min(k, r + 3);
  const mpq_class base = fc.residue(r + *e);
  const mpq_class step = pow_q(p, r + *e);
  const unsigned long targets = ipow(p, w - r).get_ui();
  for (unsigned long s = 0; s < targets; ++s) {
    const mpq_class target = base + step * static_cast<long>(s);
    const SolveResult z = local_solve(f, PadicNumber::from_residue(c0, p, k), *d.df,
                                      PadicNumber::from_residue(target, p, k + *e), k + *e, 64, r);
    if (!b.contains(z.z)) fail(Errc::NotAContraction, "preimage of " + rational_to_string(target) + " left the ball");
  }
  return image;
}

JacobianCertificate certify_jacobian(const FuncExpr& f, const Ball& b, int k, const CertifyOptions& opts) {
  JacobianCertificate cert(b, k);
  const Grid g(b, k, opts.budget);
  cert.residues = g.n;

  // (b) and (c): strict derivative at the center and spot points. e comes
  // from the center, or from the largest |Df| seen when the center has none.
  std::vector<unsigned long> pts{0};
  for (unsigned long t : spot_indices(g.n, opts.spot_points, opts.seed)) pts.push_back(t);
  std::optional<PadicNumber> df_used;
  for (unsigned long t : pts) {
    cert.b.estimates.push_back(estimate_at(f, g.point(t), b, opts));
    const DiffEstimate& est = cert.b.estimates.back();
    const auto nv = norm_of(est);
    cert.c.norms.emplace_back(g.point(t), nv);
    if (nv && (!cert.e || (t != 0 && !norm_of(cert.b.estimates.front()) && *nv < *cert.e))) {
      cert.e = nv;
      df_used = est.df;
    }
  }
  cert.b.pass = std::all_of(cert.b.estimates.begin(), cert.b.estimates.end(),
                            [](const DiffEstimate& d) { return d.verdict == Verdict::Converged; });
  cert.c.pass = cert.b.pass && std::all_of(cert.c.norms.begin(), cert.c.norms.end(),
                                           [&](const auto& nv) { return nv.second == cert.c.norms.front().second; });

  if (!cert.e) {
    cert.d.detail = "Df vanishes at every sampled point";
    cert.a.detail = cert.d.detail;
    return cert;
  }
  const int e = *cert.e;

  // (d): all pairs, through the level maps.
  const PadicNumber fc = value_abs(f, g.c, g.p, k + e);
  std::vector<PadicNumber> d;
  d.reserve(g.n);
  for (unsigned long t = 0; t < g.n; ++t) d.push_back(t == 0 ? fc - fc : value_abs(f, g.point(t), g.p, k + e) - fc);
  cert.d.witness = isometry_witness(g, d, e);
  cert.d.pass = !cert.d.witness;
  if (cert.d.witness) {
    cert.d.detail = "v(f(x) - f(y)) " + std::string(cert.d.witness->v_df_lower_bound ? ">= " : "= ") +
                    std::to_string(cert.d.witness->v_df) + " but e + v(x - y) = " +
                    std::to_string(e + cert.d.witness->v_dx);
  }

  // (a): image residues form one ball of the same size, and targets are hit.
  const Ball image(fc, g.r + e);
  cert.a.image_ball = image;
  std::map<mpq_class, char> seen;
  bool inside = true;
  for (unsigned long t = 0; t < g.n; ++t) {
    seen.emplace(d[t].residue(k + e), 0);
    inside = inside && (d[t].is_zero() || d[t].val() >= g.r + e);
  }
  cert.a.image_count = seen.size();
  if (!inside) {
    cert.a.detail = "image leaves " + image.to_string();
  } else if (cert.a.image_count != g.n) {
    cert.a.detail = "image has " + std::to_string(cert.a.image_count) + " residues for " + std::to_string(g.n) + " inputs";
  } else {
    try {
      const int w = std::min(k, g.r + 3);
      const mpq_class base = fc.residue(g.r + e);
      const mpq_class step = pow_q(g.p, g.r + e);
      const unsigned long targets = g.modulus(w);
      for (unsigned long s = 0; s < targets; ++s) {
        const mpq_class target = base + step * static_cast<long>(s);
        const SolveResult z = local_solve(f, PadicNumber::from_residue(g.c, g.p, k), *df_used,
                                          PadicNumber::from_residue(target, g.p, k + e), k + e, 64, g.r);
        if (!b.contains(z.z)) fail(Errc::NotAContraction, "preimage of " + rational_to_string(target) + " left the ball");
        ++cert.a.witnesses;
      }
      cert.a.pass = true;
    } catch (const PadicError& err) {
      if (err.code() == Errc::BudgetExceeded) throw;
      cert.a.detail = std::string("surjectivity witness failed: ") + err.what();
    }
  }
  return cert;
}

MonotonicityCertificate certify_monotone(const FuncExpr& f, const Ball& b, int k, bool strict,
                                         const CertifyOptions& opts) {
  MonotonicityCertificate cert(b, k, strict);
  const Grid g(b, k, opts.budget);
  if (static_cast<double>(g.n) * static_cast<double>(g.n) > static_cast<double>(opts.budget) * 4.0) {
    fail(Errc::BudgetExceeded, "triple check over " + std::to_string(g.n) + " residues exceeds the budget");
  }
  cert.residues = g.n;
  const int kv = cert.value_precision;
  std::vector<PadicNumber> vals;
  vals.reserve(g.n);
  int low = 0;
  for (unsigned long t = 0; t < g.n; ++t) {
    vals.push_back(value_abs(f, g.point(t), g.p, kv));
    if (!vals.back().is_zero() && vals.back().val() < low) low = vals.back().val();
  }
  // Scaled integer residues: v(f(x) - f(y)) = valuation of the difference + low.
  const mpq_class scale = pow_q(g.p, -low);
  std::vector<mpz_class> iv(g.n);
  for (unsigned long t = 0; t < g.n; ++t) iv[t] = mpq_class(vals[t].residue(kv) * scale).get_num();

  const int levels = k - g.r + 1;  // v(x - y) in [r, k), and the point itself
  std::vector<int> lo(levels), hi(levels);
  std::vector<unsigned long> lo_at(levels), hi_at(levels);
  std::vector<char> used(levels);
  mpz_class tmp;
  for (unsigned long x = 0; x < g.n; ++x) {
    std::fill(used.begin(), used.end(), 0);
    for (unsigned long y = 0; y < g.n; ++y) {
      int lvl, bv;
      if (y == x) {
        // Ties at the value precision count as equal values.
        lvl = levels - 1;
        bv = kv;
      } else {
        lvl = g.vdx(x, y) - g.r;
        tmp = iv[x] - iv[y];
        bv = tmp == 0 ? kv : std::min(kv, valuation_of(tmp, g.p, kv - low) + low);
      }
      if (!used[lvl]) {
        used[lvl] = 1;
        lo[lvl] = hi[lvl] = bv;
        lo_at[lvl] = hi_at[lvl] = y;
      } else {
        if (bv < lo[lvl]) lo[lvl] = bv, lo_at[lvl] = y;
        if (bv > hi[lvl]) hi[lvl] = bv, hi_at[lvl] = y;
      }
    }
    std::optional<int> run;  // level of the running maximum
    for (int l = 0; l < levels; ++l) {
      if (!used[l]) continue;
      std::optional<std::pair<unsigned long, unsigned long>> bad;
      if (!strict && lo[l] != hi[l]) bad = {hi_at[l], lo_at[l]};
      if (!bad && run) {
        const bool violates = strict ? lo[l] <= hi[*run] : lo[l] < hi[*run];
        if (violates) bad = {hi_at[*run], lo_at[l]};
      }
      if (bad) {
        cert.witness = MonotonicityCertificate::Triple{g.point(x), g.point(bad->first), g.point(bad->second)};
        return cert;
      }
      if (!run || hi[l] > hi[*run]) run = l;
    }
  }
  cert.pass = true;
  return cert;
}

DomainPartition partition_domain(const FuncExpr& f, const Ball& x, int k, int n, const CertifyOptions& opts) {
  if (k < x.radius_val()) fail(Errc::InvalidArgument, "k is below the radius of the domain");
  DomainPartition out(x, k, n);
  const long p = x.prime();

  auto finish_exceptional = [&](const Ball& b, std::string note) {
    PartitionEntry entry(b, PartitionTag::I);
    entry.note = std::move(note);
    ScaleOptions o;
    o.s = 3;
    o.j0 = k + 2;
    o.jmax = o.j0 + 4;
    o.budget = opts.budget;
    o.seed = opts.seed;
    try {
      entry.center = classify_point(f, b.center_residue(), p, n, o).kind;
    } catch (const PadicError&) {
      entry.center = std::nullopt;
    }
    out.entries.push_back(std::move(entry));
  };

  auto visit = [&](auto&& self, const Ball& b) -> void {
    const int rho = b.radius_val();
    const int kc = std::max(k, rho + 1) + 2;
    try {
      const Grid g(b, kc, opts.budget);
      const PadicNumber fc = value_abs(f, g.c, p, 2 * kc);
      bool constant = true;
      for (unsigned long t = 1; t < g.n && constant; ++t) {
        constant = value_abs(f, g.point(t), p, 2 * kc).agrees_mod(fc, 2 * kc);
      }
      if (constant) {
        out.entries.emplace_back(b, PartitionTag::U);
        return;
      }
      const JacobianCertificate cert = certify_jacobian(f, b, kc, opts);
      if (cert.pass() && cert.e) {
        PartitionEntry& entry = out.entries.emplace_back(b, PartitionTag::V);
        entry.e = cert.e;
        entry.image_ball = cert.a.image_ball;
        return;
      }
      if (rho >= k) {
        std::string why = !cert.b.pass ? "no strict derivative"
                          : !cert.c.pass ? "|Df| not constant"
                          : !cert.d.pass ? "isometry check failed"
                                         : "image check failed";
        finish_exceptional(b, why);
        return;
      }
    } catch (const PadicError& err) {
      if (err.code() == Errc::BudgetExceeded) throw;
      if (rho >= k) {
        finish_exceptional(b, err.what());
        return;
      }
    }
    for (const Ball& child : b.children()) self(self, child);
  };
  visit(visit, x);
  return out;
}

nlohmann::json to_json(const Ball& b) {
  return {{"center", rational_json(b.center_residue())}, {"radius", b.radius_val()}, {"text", b.to_string()}};
}

nlohmann::json to_json(const SolveResult& r) {
  nlohmann::json log = nlohmann::json::array();
  for (const auto& s : r.log) {
    log.push_back({{"iteration", s.iteration},
                   {"x", rational_json(s.x)},
                   {"step_valuation", s.step_val ? nlohmann::json(*s.step_val) : nullptr},
                   {"residual_valuation", s.residual_val}});
  }
  return {{"z", padic_json(r.z)}, {"radius", r.radius}, {"iterations", r.iterations}, {"log", log}};
}

nlohmann::json to_json(const JacobianCertificate& c) {
  auto opt = [](const std::optional<int>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json est = nlohmann::json::array();
  for (const auto& d : c.b.estimates) {
    est.push_back({{"point", rational_json(d.point)},
                   {"verdict", verdict_name(d.verdict)},
                   {"df", d.df ? padic_json(*d.df) : nlohmann::json(nullptr)},
                   {"certified_scale", d.certified_scale},
                   {"exhaustive", d.exhaustive}});
  }
  nlohmann::json norms = nlohmann::json::array();
  for (const auto& [x, v] : c.c.norms) norms.push_back({{"point", rational_json(x)}, {"valuation", opt(v)}});
  nlohmann::json wit = nullptr;
  if (c.d.witness) {
    const auto& w = *c.d.witness;
    wit = {{"x", rational_json(w.x)},
           {"y", rational_json(w.y)},
           {"v_dx", w.v_dx},
           {"v_df", w.v_df},
           {"v_df_lower_bound", w.v_df_lower_bound}};
  }
  return {{"ball", to_json(c.ball)},
          {"k", c.k},
          {"e", opt(c.e)},
          {"residues", c.residues},
          {"exhaustive", c.exhaustive},
          {"pass", c.pass()},
          {"check_a",
           {{"pass", c.a.pass},
            {"image_ball", c.a.image_ball ? to_json(*c.a.image_ball) : nlohmann::json(nullptr)},
            {"image_count", c.a.image_count},
            {"witnesses", c.a.witnesses},
            {"detail", c.a.detail}}},
          {"check_b", {{"pass", c.b.pass}, {"estimates", est}}},
          {"check_c", {{"pass", c.c.pass}, {"norms", norms}}},
          {"check_d", {{"pass", c.d.pass}, {"witness", wit}, {"detail", c.d.detail}}}};
}

nlohmann::json to_json(const MonotonicityCertificate& c) {
  nlohmann::json j{{"ball", to_json(c.ball)},
                   {"k", c.k},
                   {"value_precision", c.value_precision},
                   {"strict", c.strict},
                   {"residues", c.residues},
                   {"pass", c.pass}};
  if (c.witness) {
    j["witness"] = {{"x", rational_json(c.witness->x)},
                    {"y", rational_json(c.witness->y)},
                    {"z", rational_json(c.witness->z)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const DomainPartition& d) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : d.entries) {
    nlohmann::json j{{"ball", to_json(e.ball)}, {"tag", tag_name(e.tag)}};
    if (e.e) j["e"] = *e.e;
    if (e.image_ball) j["image_ball"] = to_json(*e.image_ball);
    if (e.tag == PartitionTag::I) {
      j["center_classification"] = e.center ? nlohmann::json(point_kind_name(*e.center)) : nlohmann::json(nullptr);
    }
    if (!e.note.empty()) j["note"] = e.note;
    entries.push_back(j);
  }
  return {{"domain", to_json(d.domain)}, {"k", d.k}, {"n", d.n}, {"entries", entries}};
}

}  // namespace padic
