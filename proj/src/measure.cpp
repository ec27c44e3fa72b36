#include "padic/measure.hpp"

#include <algorithm>
#include <map>

namespace padic {

namespace {

mpq_class pow_q(long p, int e) {
  return e >= 0 ? mpq_class(ipow(p, e)) : mpq_class(1) / mpq_class(ipow(p, -e));
}

bool converges_to_zero(const DiffEstimate& d) { return d.verdict == Verdict::Converged && d.df->is_zero(); }

}  // namespace

mpq_class ball_measure(const Ball& b) { return pow_q(b.prime(), -b.radius_val()); }

mpq_class residue_set_measure(const std::set<mpq_class>& residues, long p, int k) {
  for (const auto& r : residues) {
    if (PadicNumber::from_residue(r, p, k).residue(k) != r) {
      fail(Errc::InvalidArgument, rational_to_string(r) + " is not a reduced residue mod p^" + std::to_string(k));
    }
  }
  return mpq_class(static_cast<unsigned long>(residues.size())) * pow_q(p, -k);
}

BallDecomposition decompose_by_Df(const FuncExpr& f, const Ball& x, int k, const CertifyOptions& opts) {
  if (k < x.radius_val()) fail(Errc::InvalidArgument, "k is below the radius of the domain");
  BallDecomposition out(x, k);
  auto visit = [&](auto&& self, const Ball& b) -> void {
    const int rho = b.radius_val();
    const int kc = std::max(k, rho + 1) + 2;
    try {
      const JacobianCertificate cert = certify_jacobian(f, b, kc, opts);
      if (cert.pass() && cert.e) {
        out.pieces.push_back({b, cert.e});
        return;
      }
      if (std::all_of(cert.b.estimates.begin(), cert.b.estimates.end(), converges_to_zero)) {
        out.pieces.push_back({b, std::nullopt});
        return;
      }
    } catch (const PadicError& err) {
      if (err.code() == Errc::BudgetExceeded) throw;
    }
    if (rho >= k) {
      out.remainder.push_back(b);
      return;
    }
    for (const Ball& child : b.children()) self(self, child);
  };
  visit(visit, x);
  return out;
}

mpq_class integrate_abs_Df(const BallDecomposition& d) {
  mpq_class sum = 0;
  for (const auto& piece : d.pieces) {
    if (piece.e) sum += pow_q(piece.ball.prime(), -*piece.e) * ball_measure(piece.ball);
  }
  return sum;
}

mpq_class integrate_abs_Df(const FuncExpr& f, const Ball& x, int k, const CertifyOptions& opts) {
  return integrate_abs_Df(decompose_by_Df(f, x, k, opts));
}

ChangeOfVariablesReport verify_change_of_variables(const FuncExpr& f, const Ball& x, int k_in,
                                                   std::optional<int> k_out, const CertifyOptions& opts) {
  ChangeOfVariablesReport rep(decompose_by_Df(f, x, k_in, opts));
  const long p = x.prime();
  std::optional<int> emax;
  for (const auto& piece : rep.decomposition.pieces) {
    if (piece.e) emax = std::max(emax.value_or(*piece.e), *piece.e);
  }
  rep.k_in = k_in;
  rep.k_out = k_out ? *k_out : k_in + emax.value_or(0);

  const std::vector<PadicNumber> xs = enumerate_ball(x, k_in, opts.budget);
  std::map<mpq_class, const PadicNumber*> first;
  std::set<mpq_class> image;
  const EvalOptions eo{rep.k_out + 8};
  for (const auto& xi : xs) {
    PadicNumber y = eval(f, xi, eo);
    if (y.absolute_precision() < rep.k_out) {
      // On a certified piece f(x) mod p^(k_in + e) depends only on x mod p^k_in.
      const auto& pieces = rep.decomposition.pieces;
      const auto home = std::find_if(pieces.begin(), pieces.end(), [&](const DfPiece& pc) { return pc.ball.contains(xi); });
      if (home != pieces.end() && home->e && k_in + *home->e >= rep.k_out) {
        y = eval_exact(f, xi.representative(), p, eo).value;
      }
    }
    if (y.absolute_precision() < rep.k_out) {
      fail(Errc::PrecisionInsufficientForImage, "f(" + xi.to_short_string() + ") is only known mod p^" +
                                                    std::to_string(y.absolute_precision()));
    }
    const mpq_class r = y.residue(rep.k_out);
    const auto [it, fresh] = first.emplace(r, &xi);
    if (!fresh) {
      fail(Errc::NotInjectiveAtScale, "f(" + rational_to_string(it->second->representative()) + ") = f(" +
                                          rational_to_string(xi.representative()) + ") mod p^" +
                                          std::to_string(rep.k_out));
    }
    image.insert(r);
  }
  rep.inputs = xs.size();
  rep.images = image.size();
  rep.lhs = residue_set_measure(image, p, rep.k_out);
  rep.rhs = integrate_abs_Df(rep.decomposition);
  rep.difference = rep.lhs - rep.rhs;
  return rep;
}

nlohmann::json to_json(const BallDecomposition& d) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& piece : d.pieces) {
    pieces.push_back({{"ball", to_json(piece.ball)},
                      {"e", piece.e ? nlohmann::json(*piece.e) : nlohmann::json(nullptr)},
                      {"measure", rational_json(ball_measure(piece.ball))}});
  }
  nlohmann::json rest = nlohmann::json::array();
  for (const auto& b : d.remainder) rest.push_back(to_json(b));
  return {{"domain", to_json(d.domain)}, {"k", d.k}, {"pieces", pieces}, {"remainder", rest}};
}

nlohmann::json to_json(const ChangeOfVariablesReport& r) {
  return {{"k_in", r.k_in},
          {"k_out", r.k_out},
          {"inputs", r.inputs},
          {"images", r.images},
          {"lhs", rational_json(r.lhs)},
          {"rhs", rational_json(r.rhs)},
          {"difference", rational_json(r.difference)},
          {"decomposition", to_json(r.decomposition)}};
}

}  // namespace padic
