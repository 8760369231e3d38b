#include "poscert/existence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "poscert/quadrature.hpp"

namespace poscert {

using namespace rounding;

namespace {

Rational inv_eps_sq_exact(const ProblemSpec& problem) {
  const Rational e2 = problem.eps * problem.eps;
  return Rational(e2.get_den(), e2.get_num());
}

// phi_n'' = -P_n' on the rule nodes: exact big-integer evaluation at the
// node midpoint plus a mean-value term with sup |P_n''| = (n-1)n(n+1)(n+2)/2.
IntervalMatrix second_derivative_table(const GaussRule& rule, int N) {
  std::vector<std::vector<BigInt>> dp(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) {
    const auto& c = shifted_legendre_int(n);
    auto& d = dp[static_cast<std::size_t>(n - 1)];
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * static_cast<long>(k));
  }
  const BigInt one(1);
  IntervalMatrix out(rule.m, N);
  for (int a = 0; a < rule.m; ++a) {
    const Interval X = rule.nodes[static_cast<std::size_t>(a)];
    const double c = rule.x[static_cast<std::size_t>(a)];
    const double r = std::max(sub_up(X.hi(), c), sub_up(c, X.lo()));
    for (int n = 1; n <= N; ++n) {
      const double m2 = 0.5 * (n - 1.0) * n * (n + 1.0) * (n + 2.0);
      const Interval v = eval_int_poly(dp[static_cast<std::size_t>(n - 1)], c, one) + Interval(-1.0, 1.0) * mul_up(m2, r);
      out.set(a, n - 1, -v);
    }
  }
  return out;
}

struct NodalValues {
  const GaussRule* rule = nullptr;
  IntervalMatrix u;    // u(x_a, y_b)
  IntervalMatrix lap;  // Laplace u(x_a, y_b)
};

NodalValues nodal_values(const SpectralFn& f, int m, bool with_laplacian) {
  NodalValues nv;
  nv.rule = &gauss_legendre(m);
  const int N = f.order();
  const IntervalMatrix Phi = basis_table(*nv.rule, N);
  const IntervalMatrix U = IntervalMatrix::from_point(f.u);
  const IntervalMatrix PhiT = Phi.transpose();
  const IntervalMatrix UPhiT = U * PhiT;
  nv.u = Phi * UPhiT;
  if (with_laplacian) {
    const IntervalMatrix Psi = second_derivative_table(*nv.rule, N);
    nv.lap = Psi * UPhiT + Phi * (U * Psi.transpose());
  }
  return nv;
}

Interval weighted_sum(const GaussRule& rule, const IntervalMatrix& vals) {
  Interval total(0.0);
  for (int a = 0; a < rule.m; ++a) {
    Interval row(0.0);
    for (int b = 0; b < rule.m; ++b) row += rule.weights[static_cast<std::size_t>(b)] * vals(a, b);
    total += rule.weights[static_cast<std::size_t>(a)] * row;
  }
  return total;
}

Interval nonneg_sqrt(const Interval& x) { return sqrt(Interval(std::fmax(x.lo(), 0.0), x.hi())); }

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;  // exact for the small arguments used here
}

}  // namespace

Poly2D residual_poly(const SpectralFn& u, const ProblemSpec& problem) {
  problem.validate();
  const Poly2D P = to_poly2d(u);
  if (problem.kind == ProblemKind::LaneEmden) return laplacian(P) + coeff_power(P, problem.p);
  const Poly2D cubic = coeff_power(P, 3);
  return laplacian(P) + inv_eps_sq_exact(problem) * (P - cubic);
}

Interval residual_l2_exact(const SpectralFn& u, const ProblemSpec& problem) {
  return nonneg_sqrt(l2_norm_sq(residual_poly(u, problem)));
}

Interval residual_l2_quadrature(const SpectralFn& u, const ProblemSpec& problem) {
  problem.validate();
  const int deg = problem.power() * (u.order() + 1);
  const NodalValues nv = nodal_values(u, gauss_points_for_degree(2 * deg), true);
  const int m = nv.rule->m;
  IntervalMatrix sq(m, m);
  const Interval c = problem.kind == ProblemKind::AllenCahn ? problem.inv_eps_sq() : Interval(1.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const Interval v = nv.u(a, b);
      const Interval F = problem.kind == ProblemKind::LaneEmden ? pow(v, problem.p) : c * (v - pow(v, 3));
      sq.set(a, b, sqr(nv.lap(a, b) + F));
    }
  return nonneg_sqrt(weighted_sum(*nv.rule, sq));
}

double residual_delta(const SpectralFn& u, const ProblemSpec& problem, const Interval& C2) {
  return mul_up(C2.hi(), residual_l2_exact(u, problem).hi());
}

Interval power_integral_exact(const SpectralFn& u, int q) {
  if (q < 2 || q % 2 != 0) throw Error(ErrorCode::ArgumentOutOfRange, "power integrals need even q >= 2");
  const Poly2D P = to_poly2d(u);
  return l2_norm_sq(q == 2 ? P : coeff_power(P, q / 2, 4096));
}

Interval power_integral_quadrature(const SpectralFn& u, int q) {
  if (q < 2 || q % 2 != 0) throw Error(ErrorCode::ArgumentOutOfRange, "power integrals need even q >= 2");
  const NodalValues nv = nodal_values(u, gauss_points_for_degree(q * (u.order() + 1)), false);
  const int m = nv.rule->m;
  IntervalMatrix pw(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) pw.set(a, b, pow(nv.u(a, b), q));
  const Interval r = weighted_sum(*nv.rule, pw);
  return Interval(std::fmax(r.lo(), 0.0), r.hi());
}

double root_up(double v, int q) {
  if (!(v > 0)) return 0.0;
  if (q == 1) return v;
  double x = std::pow(v, 1.0 / q);
  while (pow(Interval(x), q).lo() < v) x = std::nextafter(x, kInf);
  return x;
}

NormValue lq_norm(const SpectralFn& u, int q, int exact_degree_limit) {
  NormValue out;
  out.q = q;
  if ((q / 2) * (u.order() + 1) <= exact_degree_limit) {
    out.integral = power_integral_exact(u, q);
    out.method = "exact";
  } else {
    out.integral = power_integral_quadrature(u, q);
    out.method = "gauss";
  }
  out.norm = root_up(out.integral.hi(), q);
  return out;
}

Interval Lipschitz::g(double t) const {
  const Interval T(t), Cc(C);
  return Interval(b_sup) * (static_cast<double>(p) * (p - 1)) * pow(Cc, 3) * Interval(K) * T *
         pow(Interval(u_norm) + Cc * T, p - 2);
}

Interval Lipschitz::G(double t) const {
  // int_0^t s (n + C s)^(p-2) ds, expanded binomially; all terms are >= 0.
  const Interval T(t), Cc(C), n(u_norm);
  Interval sum(0.0);
  for (int j = 0; j <= p - 2; ++j)
    sum += binom(p - 2, j) * pow(n, p - 2 - j) * pow(Cc, j) * pow(T, j + 2) / static_cast<double>(j + 2);
  return Interval(b_sup) * (static_cast<double>(p) * (p - 1)) * pow(Cc, 3) * Interval(K) * sum;
}

Lipschitz lipschitz_g(const ProblemSpec& problem, double K, double C_p1, double u_norm_p1) {
  problem.validate();
  Lipschitz lip;
  if (problem.kind == ProblemKind::LaneEmden) {
    lip.p = problem.p;
    lip.b_sup = 1.0;
  } else {
    lip.p = 3;
    lip.b_sup = problem.inv_eps_sq().hi();
  }
  if (lip.p < 2) throw Error(ErrorCode::UnsupportedNonlinearity, "Lipschitz bound needs p >= 2");
  lip.C = C_p1;
  lip.u_norm = u_norm_p1;
  lip.K = K;
  return lip;
}

bool alpha_admissible(double alpha, double delta, double K, const Lipschitz& lip) {
  const Interval lhs = Interval(alpha) / Interval(K) - lip.G(alpha);
  return lhs.lo() >= delta && (Interval(K) * lip.g(alpha)).hi() < 1.0;
}

AlphaSearch find_alpha(double delta, double K, const Lipschitz& lip) {
  if (!(delta >= 0) || !(K > 0)) throw Error(ErrorCode::ArgumentOutOfRange, "find_alpha needs delta >= 0 and K > 0");
  auto slack = [&](double a) { return sub_down((Interval(a) / Interval(K) - lip.G(a)).lo(), delta); };
  double base = mul_up(K, delta);
  if (base == 0) base = 1e-300;
  const double start = base * (1 - 1e-3);
  constexpr int kSteps = 400;
  const double ratio = std::pow(10.0 / (1 - 1e-3), 1.0 / kSteps);
  double prev = 0;
  double best = -kInf;
  double a = start;
  for (int k = 0; k <= kSteps; ++k, prev = a, a *= ratio) {
    if (!alpha_admissible(a, delta, K, lip)) {
      best = std::max(best, slack(a));
      continue;
    }
    if (k > 0) {
      double lo = prev, hi = a;
      for (int it = 0; it < 60 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = lo + (hi - lo) / 2;
        if (alpha_admissible(mid, delta, K, lip)) hi = mid;
        else lo = mid;
      }
      a = hi;
    }
    return {a, slack(a)};
  }
  std::ostringstream msg;
  msg << "no admissible alpha in [" << start << ", " << 10 * base << "]; max of alpha/K - G(alpha) - delta = " << best;
  throw Error(ErrorCode::NoAdmissibleAlpha, msg.str());
}

int linf_norm_exponent(const ProblemSpec& problem) {
  return problem.kind == ProblemKind::LaneEmden ? 6 * (problem.p - 1) : 12;
}

double linf_radius(const ProblemSpec& problem, double rho, const LinfInputs& in) {
  if (!(rho >= 0)) throw Error(ErrorCode::ArgumentOutOfRange, "rho must be >= 0");
  const Interval r(rho), C2(in.C2), C3(in.C3), Cq(in.Cq), n(in.u_norm_q);
  const Interval base = in.c.c0 * C2 * r + in.c.c1 * r;
  Interval hess(0.0);
  if (problem.kind == ProblemKind::LaneEmden) {
    const int p = problem.p;
    const int e = 2 * (p - 1);
    const Interval inner = pow(n, e) + pow(r, e) / static_cast<double>(2 * p - 1) * pow(Cq, e);
    const Interval factor = Interval(std::ldexp(1.0, p - 2)) * sqrt(Interval(2.0));  // 2^(p - 3/2)
    hess = factor * static_cast<double>(p) * r * C3 * sqrt(inner);
  } else {
    const Interval poly = 1.0 + 3.0 * sqr(n) + 3.0 * r * Cq * n + sqr(r) * sqr(Cq);
    hess = r * problem.inv_eps_sq() * C3 * poly;
  }
  return (base + in.c.c2 * (hess + Interval(in.residual_l2))).hi();
}

std::string spectral_hash(const SpectralFn& u) {
  std::ostringstream os;
  write_spectral(os, u);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExistenceCertificate verify_existence(const SpectralFn& u, const ProblemSpec& problem, const InverseBound& inv,
                                      const ExistenceOptions& opts) {
  problem.validate();
  ExistenceCertificate c;
  c.problem = problem;
  c.u_hash = spectral_hash(u);
  c.tau = inv.tau;
  c.K = inv.K.K;
  const EmbeddingConstants emb(lambda1_unit_square(), inv.tau);

  c.residual_exact = residual_l2_exact(u, problem);
  c.residual_quadrature = residual_l2_quadrature(u, problem);
  const double C2 = emb.upper(2);
  c.delta = mul_up(C2, c.residual_exact.hi());

  const int p = problem.power();
  const NormValue np1 = lq_norm(u, p + 1, opts.exact_degree_limit);
  c.lip = lipschitz_g(problem, c.K, emb.upper(p + 1), np1.norm);
  c.lip_norm_method = np1.method;
  c.alpha = find_alpha(c.delta, c.K, c.lip).alpha;
  c.rho = c.alpha;

  const int q = linf_norm_exponent(problem);
  const NormValue nq = lq_norm(u, q, opts.exact_degree_limit);
  c.linf.c = linf_constants();
  c.linf.C2 = C2;
  c.linf.C3 = emb.upper(3);
  c.linf.Cq = emb.upper(q);
  c.linf.u_norm_q = nq.norm;
  c.linf.residual_l2 = c.residual_exact.hi();
  c.linf_norm_method = nq.method;
  c.r2 = linf_radius(problem, c.rho, c.linf);
  return c;
}

bool recheck(const ExistenceCertificate& c) {
  if (!(c.alpha > 0) || !(c.r2 > 0) || c.rho < c.alpha) return false;
  if (c.delta < mul_up(c.linf.C2, c.residual_exact.hi())) return false;
  if (c.lip.K != c.K) return false;
  if (!alpha_admissible(c.alpha, c.delta, c.K, c.lip)) return false;
  return c.r2 >= linf_radius(c.problem, c.rho, c.linf);
}

nlohmann::json problem_to_json(const ProblemSpec& p) {
  nlohmann::json j{{"kind", p.kind_name()}, {"N", p.N}};
  if (p.kind == ProblemKind::LaneEmden) j["p"] = p.p;
  else j["eps"] = to_string(p.eps);
  return j;
}

ProblemSpec problem_from_json(const nlohmann::json& j) {
  try {
    ProblemSpec p;
    p.kind = parse_problem_kind(j.at("kind").get<std::string>());
    p.N = j.at("N").get<int>();
    if (p.kind == ProblemKind::LaneEmden) p.p = j.at("p").get<int>();
    else p.eps = parse_rational(j.at("eps").get<std::string>());
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("problem: ") + e.what());
  }
}

nlohmann::json to_json(const ExistenceCertificate& c) {
  using nlohmann::json;
  json lin{{"c0", to_hex(c.linf.c.c0)},
           {"c1", to_hex(c.linf.c.c1)},
           {"c2", to_hex(c.linf.c.c2)},
           {"C2", to_hex(c.linf.C2)},
           {"C3", to_hex(c.linf.C3)},
           {"q", linf_norm_exponent(c.problem)},
           {"Cq", to_hex(c.linf.Cq)},
           {"u_norm_q", to_hex(c.linf.u_norm_q)},
           {"u_norm_q_method", c.linf_norm_method},
           {"residual_l2", to_hex(c.linf.residual_l2)}};
  json lip{{"p", c.lip.p},
           {"b_sup", to_hex(c.lip.b_sup)},
           {"C_p1", to_hex(c.lip.C)},
           {"u_norm_p1", to_hex(c.lip.u_norm)},
           {"u_norm_p1_method", c.lip_norm_method},
           {"K", to_hex(c.lip.K)},
           {"g_includes_K", c.g_includes_K}};
  return json{{"type", "existence"},
              {"problem", problem_to_json(c.problem)},
              {"u_hash", c.u_hash},
              {"tau", to_hex(c.tau)},
              {"delta", to_hex(c.delta)},
              {"K", to_hex(c.K)},
              {"lipschitz", lip},
              {"alpha", to_hex(c.alpha)},
              {"r1", to_hex(c.alpha)},
              {"rho", to_hex(c.rho)},
              {"linf", lin},
              {"r2", to_hex(c.r2)},
              {"residual_exact", to_hex(c.residual_exact)},
              {"residual_quadrature", to_hex(c.residual_quadrature)},
              {"decimal", {{"delta", c.delta}, {"K", c.K}, {"r1", c.alpha}, {"r2", c.r2}}}};
}

ExistenceCertificate existence_from_json(const nlohmann::json& j) {
  auto hex = [](const nlohmann::json& o, const char* k) { return parse_hex(o.at(k).get<std::string>()); };
  auto ival = [](const nlohmann::json& o, const char* k) { return parse_interval(o.at(k).get<std::string>()); };
  try {
    ExistenceCertificate c;
    c.problem = problem_from_json(j.at("problem"));
    c.u_hash = j.at("u_hash").get<std::string>();
    c.tau = ival(j, "tau");
    c.delta = hex(j, "delta");
    c.K = hex(j, "K");
    const auto& lip = j.at("lipschitz");
    c.lip.p = lip.at("p").get<int>();
    c.lip.b_sup = hex(lip, "b_sup");
    c.lip.C = hex(lip, "C_p1");
    c.lip.u_norm = hex(lip, "u_norm_p1");
    c.lip.K = hex(lip, "K");
    c.lip_norm_method = lip.at("u_norm_p1_method").get<std::string>();
    c.g_includes_K = lip.at("g_includes_K").get<bool>();
    c.alpha = hex(j, "alpha");
    c.rho = hex(j, "rho");
    const auto& lin = j.at("linf");
    c.linf.c = linf_constants();
    c.linf.c.c0 = ival(lin, "c0");
    c.linf.c.c1 = ival(lin, "c1");
    c.linf.c.c2 = ival(lin, "c2");
    c.linf.C2 = hex(lin, "C2");
    c.linf.C3 = hex(lin, "C3");
    c.linf.Cq = hex(lin, "Cq");
    c.linf.u_norm_q = hex(lin, "u_norm_q");
    c.linf.residual_l2 = hex(lin, "residual_l2");
    c.linf_norm_method = lin.at("u_norm_q_method").get<std::string>();
    c.r2 = hex(j, "r2");
    c.residual_exact = ival(j, "residual_exact");
    c.residual_quadrature = ival(j, "residual_quadrature");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("existence certificate: ") + e.what());
  }
}

}  // namespace poscert
