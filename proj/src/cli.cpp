#include "padic/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>

#include "padic/calculus.hpp"
#include "padic/certify.hpp"
#include "padic/cosets.hpp"
#include "padic/measure.hpp"

namespace padic {

namespace {

struct RunConfig {
  long p = 5;
  int precision = 8;
  std::size_t budget = 1'000'000;
  std::uint64_t seed = 0;
  int j0 = 6;
  int jmax = 10;
  int s = 6;
  bool json = false;
  bool strict = false;

  void validate() const {
    if (!is_prime(p)) fail(Errc::InvalidArgument, std::to_string(p) + " is not prime");
    if (precision < 1) fail(Errc::InvalidArgument, "precision must be at least 1");
    if (budget < 1) fail(Errc::InvalidArgument, "budget must be at least 1");
  }

  ScaleOptions scales() const {
    ScaleOptions o;
    o.j0 = j0;
    o.jmax = jmax;
    o.s = s;
    o.budget = budget;
    o.seed = seed;
    return o;
  }

  CertifyOptions certify() const {
    CertifyOptions o;
    o.budget = budget;
    o.seed = seed;
    return o;
  }
};

struct Inputs {
  std::string function;
  std::string at = "0";
  std::string ball = "0:0";
  std::string target;
  std::string direction;
  int k = 4;
  int k_out = 0;
  int n = 1;
  int tol = 0;
  int max_iter = 64;
  bool weak = false;
  std::string demo;
};

FuncExpr load_function(const std::string& arg) {
  if (arg.empty()) fail(Errc::InvalidArgument, "no function given (-f)");
  if (arg.front() != '@') return parse_expr(arg);
  std::ifstream in(arg.substr(1));
  if (!in) fail(Errc::InvalidArgument, "cannot read " + arg.substr(1));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("bad JSON in ") + arg.substr(1) + ": " + e.what());
  }
  return expr_from_json(j);
}

std::string pass_word(bool ok) { return ok ? "PASS" : "FAIL"; }

void emit(std::ostream& out, const RunConfig& cfg, nlohmann::json j, const std::string& text) {
  if (cfg.json) {
    j["config"] = {{"prime", cfg.p},   {"precision", cfg.precision}, {"budget", cfg.budget}, {"seed", cfg.seed},
                   {"j0", cfg.j0},     {"jmax", cfg.jmax},           {"s", cfg.s}};
    out << j.dump(2) << "\n";
  } else {
    out << text;
  }
}

int verdict_status(const RunConfig& cfg, bool ok) { return cfg.strict && !ok ? 1 : 0; }

int cmd_eval(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const PadicNumber x = PadicNumber::from_rational(parse_rational(in.at), cfg.p, cfg.precision);
  const PadicNumber y = eval(f, x, {cfg.precision});
  nlohmann::json j{{"function", to_string(f)}, {"point", in.at}, {"prime", cfg.p}, {"value", padic_json(y)}};
  emit(out, cfg, j, y.to_short_string() + "\n");
  return 0;
}

std::string estimate_text(const DiffEstimate& d) {
  std::ostringstream s;
  s << verdict_name(d.verdict);
  if (d.df) s << " " << d.df->to_short_string() << " (certified mod p^" << d.certified_scale << ")";
  s << (d.exhaustive ? ", exhaustive" : ", sampled") << "\n";
  return s.str();
}

int cmd_diff(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const mpq_class a = parse_rational(in.at);
  const DiffEstimate d = in.direction.empty()
                             ? strict_derivative(f, a, cfg.p, cfg.scales())
                             : directional_derivative(f, a, cfg.p, in.n, parse_rational(in.direction), cfg.scales());
  emit(out, cfg, to_json(d), estimate_text(d));
  return verdict_status(cfg, d.verdict == Verdict::Converged);
}

int cmd_classify(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const PointClassification c = classify_point(f, parse_rational(in.at), cfg.p, in.n, cfg.scales());
  std::ostringstream s;
  s << point_kind_name(c.kind);
  if (c.df) s << " Df = " << c.df->to_short_string();
  s << "\n";
  for (std::size_t i = 0; i < c.report.lambdas.size(); ++i) {
    s << "  lambda = " << c.report.lambdas[i].value.get_str() << ": " << estimate_text(c.report.estimates[i]);
  }
  emit(out, cfg, to_json(c), s.str());
  return verdict_status(cfg, c.kind != PointKind::Undetermined);
}

int cmd_cosets(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const CosetTable t = build_coset_table(cfg.p, in.n, cfg.budget);
  std::ostringstream s;
  s << t.size() << " cosets of P_" << in.n << " in Q_" << cfg.p << "^x:";
  for (const auto& r : t.representatives()) s << " " << r.value.get_str();
  s << "\n";
  emit(out, cfg, to_json(t), s.str());
  return 0;
}

int cmd_solve(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const mpq_class a = parse_rational(in.at);
  if (in.target.empty()) fail(Errc::InvalidArgument, "solve needs --target");
  const int tol = in.tol > 0 ? in.tol : cfg.precision;
  const DiffEstimate d = strict_derivative(f, a, cfg.p, cfg.scales());
  if (d.verdict != Verdict::Converged) fail(Errc::InsufficientPrecision, "no strict derivative at the start point");
  const PadicNumber c = PadicNumber::from_residue(parse_rational(in.target), cfg.p, tol + 8);
  const SolveResult r = local_solve(f, PadicNumber::from_residue(a, cfg.p, tol + 8), *d.df, c, tol, in.max_iter);
  nlohmann::json j = to_json(r);
  j["df"] = padic_json(*d.df);
  emit(out, cfg, j, r.z.to_short_string() + " after " + std::to_string(r.iterations) + " iterations\n");
  return 0;
}

int cmd_certify_jacobian(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const JacobianCertificate c = certify_jacobian(f, parse_ball(in.ball, cfg.p), in.k, cfg.certify());
  std::ostringstream s;
  s << pass_word(c.pass()) << " " << c.ball.to_string() << " mod p^" << c.k;
  if (c.e) s << ", |Df| = p^" << -*c.e;
  s << "\n  (a) " << pass_word(c.a.pass);
  if (c.a.image_ball) s << " image " << c.a.image_ball->to_string();
  if (!c.a.detail.empty()) s << " " << c.a.detail;
  s << "\n  (b) " << pass_word(c.b.pass) << "\n  (c) " << pass_word(c.c.pass) << "\n  (d) " << pass_word(c.d.pass);
  if (c.d.witness) {
    s << " x = " << rational_to_string(c.d.witness->x) << ", y = " << rational_to_string(c.d.witness->y) << ": "
      << c.d.detail;
  }
  s << "\n";
  emit(out, cfg, to_json(c), s.str());
  return verdict_status(cfg, c.pass());
}

int cmd_certify_monotone(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const MonotonicityCertificate c = certify_monotone(f, parse_ball(in.ball, cfg.p), in.k, !in.weak, cfg.certify());
  std::ostringstream s;
  s << pass_word(c.pass) << " " << c.ball.to_string() << " mod p^" << c.k;
  if (c.witness) {
    s << " witness x = " << rational_to_string(c.witness->x) << ", y = " << rational_to_string(c.witness->y)
      << ", z = " << rational_to_string(c.witness->z);
  }
  s << "\n";
  emit(out, cfg, to_json(c), s.str());
  return verdict_status(cfg, c.pass);
}

int cmd_partition(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const DomainPartition d = partition_domain(f, parse_ball(in.ball, cfg.p), in.k, in.n, cfg.certify());
  std::ostringstream s;
  for (const auto& e : d.entries) {
    s << tag_name(e.tag) << " " << e.ball.to_string();
    if (e.e) s << " e = " << *e.e;
    if (e.center) s << " center " << point_kind_name(*e.center);
    if (!e.note.empty()) s << " (" << e.note << ")";
    s << "\n";
  }
  emit(out, cfg, to_json(d), s.str());
  return 0;
}

int cmd_integrate(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const BallDecomposition d = decompose_by_Df(f, parse_ball(in.ball, cfg.p), in.k, cfg.certify());
  const mpq_class v = integrate_abs_Df(d);
  nlohmann::json j{{"integral", rational_json(v)}, {"decomposition", to_json(d)}};
  std::string text = rational_to_string(v) + "\n";
  if (!d.remainder.empty()) text += std::to_string(d.remainder.size()) + " uncertified balls left out\n";
  emit(out, cfg, j, text);
  return 0;
}

int cmd_verify_cov(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = load_function(in.function);
  const std::optional<int> k_out = in.k_out > 0 ? std::optional<int>(in.k_out) : std::nullopt;
  const ChangeOfVariablesReport r =
      verify_change_of_variables(f, parse_ball(in.ball, cfg.p), in.k, k_out, cfg.certify());
  const bool ok = r.difference == 0;
  emit(out, cfg, to_json(r),
       pass_word(ok) + " lhs = " + rational_to_string(r.lhs) + ", rhs = " + rational_to_string(r.rhs) + "\n");
  return verdict_status(cfg, ok);
}

int demo_pathological(const RunConfig& cfg, std::ostream& out) {
  const long p = cfg.p;
  const FuncExpr g = FuncExpr::digit_spread(2);
  nlohmann::json pts = nlohmann::json::array();
  bool deriv_ok = true;
  for (long a = 0; a < 10; ++a) {
    const DiffEstimate d = strict_derivative(g, a, p, cfg.scales());
    const bool ok = d.verdict == Verdict::Converged && d.df->agrees_mod(PadicNumber::zero(p, cfg.s), cfg.s);
    deriv_ok = deriv_ok && ok;
    pts.push_back({{"point", a}, {"verdict", verdict_name(d.verdict)}, {"zero", ok}});
  }
  const int kin = 4;
  const std::size_t images = image_residues(g, Ball::integers(p), kin, 2 * kin, cfg.budget).size();
  const std::size_t inputs = ball_residue_count(Ball::integers(p), kin);
  const bool inj_ok = images == inputs;
  nlohmann::json meas = nlohmann::json::array();
  bool meas_ok = true;
  std::string meas_text;
  for (int k = 2; k <= 4; ++k) {
    const mpq_class m = residue_set_measure(image_residues(g, Ball::integers(p), k, 2 * k, cfg.budget), p, 2 * k);
    const mpq_class want = mpq_class(1) / mpq_class(ipow(p, k));
    meas_ok = meas_ok && m == want;
    meas.push_back({{"k", k}, {"measure", rational_json(m)}, {"expected", rational_json(want)}});
    meas_text += (meas_text.empty() ? "" : ", ") + rational_to_string(m);
  }
  const bool ok = deriv_ok && inj_ok && meas_ok;
  nlohmann::json j{{"demo", "pathological"},
                   {"prime", p},
                   {"derivative_zero", {{"pass", deriv_ok}, {"points", pts}}},
                   {"injective", {{"pass", inj_ok}, {"k", kin}, {"inputs", inputs}, {"images", images}}},
                   {"image_measure", {{"pass", meas_ok}, {"scales", meas}}},
                   {"pass", ok}};
  std::ostringstream s;
  s << "derivative zero at 10 points: " << pass_word(deriv_ok) << "\n"
    << "injective on residues mod p^" << kin << ": " << pass_word(inj_ok) << " (" << inputs << " inputs, " << images
    << " images)\n"
    << "image measure p^-k for k = 2, 3, 4: " << pass_word(meas_ok) << " (" << meas_text << ")\n";
  emit(out, cfg, j, s.str());
  return verdict_status(cfg, ok);
}

int demo_jacobian(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  const FuncExpr f = parse_expr("x^2");
  const JacobianCertificate near = certify_jacobian(f, Ball(cfg.p, 1, 1), in.k, cfg.certify());
  const JacobianCertificate whole = certify_jacobian(f, Ball::integers(cfg.p), in.k, cfg.certify());
  const bool ok = near.pass() && !whole.d.pass;
  nlohmann::json j{{"demo", "jacobian"}, {"unit_ball", to_json(near)}, {"whole_ring", to_json(whole)}, {"pass", ok}};
  std::ostringstream s;
  s << "x^2 on " << near.ball.to_string() << ": " << pass_word(near.pass()) << "\n"
    << "x^2 on " << whole.ball.to_string() << " fails (d): " << pass_word(!whole.d.pass);
  if (whole.d.witness) {
    s << " (x = " << rational_to_string(whole.d.witness->x) << ", y = " << rational_to_string(whole.d.witness->y)
      << ")";
  }
  s << "\n";
  emit(out, cfg, j, s.str());
  return verdict_status(cfg, ok);
}

int demo_directional(const RunConfig& cfg, std::ostream& out) {
  ScaleOptions o = cfg.scales();
  o.s = 3;
  o.j0 = 4;
  o.jmax = 8;
  const PointClassification s_pt = classify_point(parse_expr("cases{coset(2, 1): x; else: 2*x}"), 0, cfg.p, 2, o);
  const PointClassification t_pt = classify_point(parse_expr("cases{coset(2, 1): x^-1; else: 0}"), 0, cfg.p, 2, o);
  const bool ok = s_pt.kind == PointKind::InS && t_pt.kind == PointKind::InT;
  nlohmann::json j{{"demo", "directional"}, {"s_example", to_json(s_pt)}, {"t_example", to_json(t_pt)}, {"pass", ok}};
  std::ostringstream s;
  s << "coset-split slope at 0: " << point_kind_name(s_pt.kind) << " " << pass_word(s_pt.kind == PointKind::InS)
    << "\n"
    << "pole along squares at 0: " << point_kind_name(t_pt.kind) << " " << pass_word(t_pt.kind == PointKind::InT)
    << "\n";
  emit(out, cfg, j, s.str());
  return verdict_status(cfg, ok);
}

int cmd_demo(const RunConfig& cfg, const Inputs& in, std::ostream& out) {
  if (in.demo == "pathological") return demo_pathological(cfg, out);
  if (in.demo == "jacobian") return demo_jacobian(cfg, in, out);
  if (in.demo == "directional") return demo_directional(cfg, out);
  fail(Errc::InvalidArgument, "unknown demo '" + in.demo + "'");
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::ParseError:
    case Errc::UnsupportedExpression:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  Inputs in;
  CLI::App app{"p-adic calculus toolkit", "padic"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML or INI file with option defaults");
  app.add_option("-p,--prime", cfg.p, "prime")->capture_default_str();
  app.add_option("-N,--precision", cfg.precision, "relative precision")->capture_default_str();
  app.add_option("--budget", cfg.budget, "enumeration budget")->capture_default_str();
  app.add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
  app.add_option("--j0", cfg.j0, "first scale")->capture_default_str();
  app.add_option("--jmax", cfg.jmax, "last scale")->capture_default_str();
  app.add_option("-s", cfg.s, "agreement digits for convergence")->capture_default_str();
  app.add_flag("--json", cfg.json, "print a JSON report");
  app.add_flag("--strict", cfg.strict, "exit 1 on a FAIL verdict");

  std::function<int()> action;
  auto sub = [&](const std::string& name, const std::string& help, std::function<int()> fn) {
    CLI::App* c = app.add_subcommand(name, help);
    c->fallthrough();
    c->callback([&action, fn] { action = fn; });
    return c;
  };
  auto fn_opt = [&](CLI::App* c) { c->add_option("-f,--function", in.function, "expression or @file.json")->required(); };
  auto ball_opt = [&](CLI::App* c) { c->add_option("--ball", in.ball, "ball c:r")->capture_default_str(); };
  auto k_opt = [&](CLI::App* c) { c->add_option("-k", in.k, "residue precision")->capture_default_str(); };
  auto n_opt = [&](CLI::App* c) { c->add_option("-n", in.n, "power for cosets and directions")->capture_default_str(); };
  auto at_opt = [&](CLI::App* c) { c->add_option("-x,--at", in.at, "point (rational)")->capture_default_str(); };

  CLI::App* c = sub("eval", "evaluate f at a point", [&] { return cmd_eval(cfg, in, out); });
  fn_opt(c);
  at_opt(c);
  c = sub("diff", "strict or directional derivative estimate", [&] { return cmd_diff(cfg, in, out); });
  fn_opt(c);
  at_opt(c);
  n_opt(c);
  c->add_option("--direction", in.direction, "lambda for a directional estimate");
  c = sub("classify-point", "differentiable, S_n or T_n", [&] { return cmd_classify(cfg, in, out); });
  fn_opt(c);
  at_opt(c);
  n_opt(c);
  c = sub("cosets", "coset representatives of the n-th powers", [&] { return cmd_cosets(cfg, in, out); });
  n_opt(c);
  c = sub("solve", "local inverse by contraction", [&] { return cmd_solve(cfg, in, out); });
  fn_opt(c);
  at_opt(c);
  c->add_option("--target", in.target, "value c to solve f(z) = c")->required();
  c->add_option("--tol", in.tol, "stop at v(f(z) - c) >= tol (default N)");
  c->add_option("--max-iter", in.max_iter, "iteration cap")->capture_default_str();
  c = sub("certify-jacobian", "local Jacobian checks on a ball", [&] { return cmd_certify_jacobian(cfg, in, out); });
  fn_opt(c);
  ball_opt(c);
  k_opt(c);
  c = sub("certify-monotone", "betweenness check on a ball", [&] { return cmd_certify_monotone(cfg, in, out); });
  fn_opt(c);
  ball_opt(c);
  k_opt(c);
  c->add_flag("--weak", in.weak, "non-strict form");
  c = sub("partition", "U/V/I partition of a ball", [&] { return cmd_partition(cfg, in, out); });
  fn_opt(c);
  ball_opt(c);
  k_opt(c);
  n_opt(c);
  c = sub("integrate", "integral of |Df| over a ball", [&] { return cmd_integrate(cfg, in, out); });
  fn_opt(c);
  ball_opt(c);
  k_opt(c);
  c = sub("verify-cov", "change of variables check", [&] { return cmd_verify_cov(cfg, in, out); });
  fn_opt(c);
  ball_opt(c);
  k_opt(c);
  c->add_option("--k-out", in.k_out, "image precision (default k + max e)");
  c = sub("demo", "pathological | jacobian | directional", [&] { return cmd_demo(cfg, in, out); });
  c->add_option("name", in.demo, "demo name")->required()->check(CLI::IsMember({"pathological", "jacobian", "directional"}));
  k_opt(c);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  try {
    cfg.validate();
    return action();
  } catch (const PadicError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace padic
