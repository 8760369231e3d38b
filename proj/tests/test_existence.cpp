#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "poscert/approx.hpp"
#include "poscert/existence.hpp"

using namespace poscert;

namespace {

// Floating Gauss-Legendre rule on [0,1] by Newton on P_m; independent of the
// library's interval rules.
void gauss_float(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(m), 0);
  w.assign(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = (1 - z) / 2;
    w[static_cast<std::size_t>(i)] = 1 / ((1 - z * z) * dp * dp);
  }
}

SpectralFn bump(double c) {
  SpectralFn f(3);
  f.u(0, 0) = c;  // phi_1 = x(1-x)
  return f;
}

}  // namespace

TEST(Residual, ZeroFunction) {
  const auto pr = ProblemSpec::lane_emden(3, 4);
  const SpectralFn zero(4);
  EXPECT_EQ(residual_l2_exact(zero, pr).hi(), 0.0);
  EXPECT_EQ(residual_delta(zero, pr, Interval(0.5)), 0.0);
}

TEST(Residual, BumpAgainstFloatQuadrature) {
  const double c = 2.5;
  std::vector<double> x, w;
  gauss_float(28, x, w);  // 4x the points needed for degree 12
  for (int p : {3, 5}) {
    double s = 0;
    for (std::size_t a = 0; a < x.size(); ++a)
      for (std::size_t b = 0; b < x.size(); ++b) {
        const double X = x[a], Y = x[b];
        const double u = c * X * (1 - X) * Y * (1 - Y);
        const double lap = -2 * c * (X * (1 - X) + Y * (1 - Y));
        const double r = lap + std::pow(u, p);
        s += w[a] * w[b] * r * r;
      }
    const double oracle = std::sqrt(s);
    const auto pr = ProblemSpec::lane_emden(p, 3);
    const Interval ex = residual_l2_exact(bump(c), pr);
    EXPECT_NEAR(ex.mid(), oracle, 1e-13 * oracle) << "p = " << p;
    const Interval q = residual_l2_quadrature(bump(c), pr);
    EXPECT_LE(q.lo(), ex.hi());
    EXPECT_GE(q.hi(), ex.lo());
  }
}

TEST(Residual, ExactAndQuadratureRoutesOverlap) {
  const std::vector<ProblemSpec> problems = {ProblemSpec::lane_emden(3, 10), ProblemSpec::lane_emden(5, 10),
                                             ProblemSpec::allen_cahn(Rational(1, 5), 10)};
  for (const auto& pr : problems) {
    const SpectralFn u = solve(pr).first;
    const Interval ex = residual_l2_exact(u, pr);
    const Interval q = residual_l2_quadrature(u, pr);
    EXPECT_LE(q.lo(), ex.hi()) << pr.name();
    EXPECT_GE(q.hi(), ex.lo()) << pr.name();
    EXPECT_LE(q.hi() - q.lo(), 1e-6 * ex.hi() + 1e-12) << pr.name();
  }
}

TEST(Norms, PowerIntegralsBothRoutes) {
  // int (x(1-x) y(1-y))^4 = (1/630)^2
  const Interval e4 = power_integral_exact(bump(1.0), 4);
  EXPECT_TRUE(e4.contains(1.0 / (630.0 * 630.0)));
  const SpectralFn u = solve(ProblemSpec::lane_emden(3, 8)).first;
  for (int q : {2, 4, 6, 12}) {
    const Interval ex = power_integral_exact(u, q);
    const Interval qu = power_integral_quadrature(u, q);
    EXPECT_LE(qu.lo(), ex.hi()) << q;
    EXPECT_GE(qu.hi(), ex.lo()) << q;
  }
  const NormValue a = lq_norm(u, 12, 0);
  const NormValue b = lq_norm(u, 12, 1000);
  EXPECT_EQ(a.method, "gauss");
  EXPECT_EQ(b.method, "exact");
  EXPECT_NEAR(a.norm, b.norm, 1e-10 * b.norm);
  EXPECT_THROW(power_integral_exact(u, 3), Error);
}

TEST(Norms, RootUp) {
  for (double v : {2.0, 1e-30, 123.456, 7e20})
    for (int q : {2, 3, 4, 12, 24}) {
      const double r = root_up(v, q);
      EXPECT_GE(pow(Interval(r), q).lo(), v);
      EXPECT_LE(r, std::pow(v, 1.0 / q) * (1 + 1e-14));
    }
}

TEST(Lipschitz, ClosedForms) {
  const auto pr = ProblemSpec::lane_emden(3, 10);
  const Lipschitz lip = lipschitz_g(pr, 2.0, 0.3, 1.7);
  EXPECT_EQ(lip.g(0).hi(), 0.0);
  EXPECT_EQ(lip.G(0).hi(), 0.0);
  const double t = 0.01;
  const double C = 0.3, n = 1.7, K = 2.0;
  const double g = 6 * C * C * C * K * t * (n + C * t);
  const double G = 6 * C * C * C * K * (n * t * t / 2 + C * t * t * t / 3);
  EXPECT_TRUE(lip.g(t).contains(g) || std::fabs(lip.g(t).mid() - g) < 1e-15 * g);
  EXPECT_NEAR(lip.G(t).mid(), G, 1e-14 * G);
  Lipschitz twice = lip;
  twice.K = 2 * lip.K;
  EXPECT_NEAR(twice.g(t).mid(), 2 * lip.g(t).mid(), 1e-14 * g);
}

TEST(Lipschitz, AntiderivativeAndMonotone) {
  const Lipschitz lip = lipschitz_g(ProblemSpec::lane_emden(5, 10), 3.0, 0.4, 2.0);
  double prev = 0;
  for (double t = 0.01; t < 1; t += 0.01) {
    const double g = lip.g(t).mid();
    EXPECT_GE(g, prev);
    prev = g;
    const double h = 1e-5;
    const double dG = (lip.G(t + h).mid() - lip.G(t - h).mid()) / (2 * h);
    EXPECT_NEAR(dG, g, 1e-6 * g);
  }
  const Lipschitz ac = lipschitz_g(ProblemSpec::allen_cahn(Rational(1, 10), 10), 1.0, 0.4, 2.0);
  EXPECT_EQ(ac.p, 3);
  EXPECT_DOUBLE_EQ(ac.b_sup, 100.0);
}

TEST(Alpha, LinearCase) {
  Lipschitz lin = lipschitz_g(ProblemSpec::lane_emden(3, 10), 4.0, 0.3, 1.0);
  lin.b_sup = 0;  // g = 0
  const AlphaSearch r = find_alpha(1e-6, 4.0, lin);
  EXPECT_GE(r.alpha, 4e-6);
  EXPECT_LE(r.alpha, 4e-6 * (1 + 1e-12));
  EXPECT_TRUE(alpha_admissible(r.alpha, 1e-6, 4.0, lin));
  const AlphaSearch z = find_alpha(0.0, 4.0, lin);
  EXPECT_GT(z.alpha, 0.0);
  EXPECT_LT(z.alpha, 1e-290);
}

TEST(Alpha, NonlinearAndFailure) {
  const Lipschitz lip = lipschitz_g(ProblemSpec::lane_emden(3, 10), 5.0, 0.3, 1.0);
  const double delta = 1e-5;
  const AlphaSearch r = find_alpha(delta, 5.0, lip);
  EXPECT_TRUE(alpha_admissible(r.alpha, delta, 5.0, lip));
  EXPECT_FALSE(alpha_admissible(r.alpha * (1 - 1e-9), delta, 5.0, lip));
  EXPECT_GE(r.alpha, 5.0 * delta);
  EXPECT_LE(r.alpha, 2 * 5.0 * delta);
  try {
    (void)find_alpha(1.0, 5.0, lip);
    FAIL() << "expected NoAdmissibleAlpha";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoAdmissibleAlpha);
  }
}

TEST(Linf, SpecialCases) {
  LinfInputs in;
  in.c = linf_constants();
  in.C2 = 0.2;
  in.C3 = 0.3;
  in.Cq = 0.5;
  in.u_norm_q = 0;
  in.residual_l2 = 1e-3;
  const auto le = ProblemSpec::lane_emden(3, 10);
  EXPECT_NEAR(linf_radius(le, 0, in), in.c.c2.mid() * 1e-3, 1e-15);
  // u_hat = 0: c0 C2 rho + c1 rho + c2 (2^(p-3/2) p rho C3 rho^(p-1) Cq^(p-1) / sqrt(2p-1) + res)
  const double rho = 0.1, p = 3;
  const double expect = in.c.c0.mid() * 0.2 * rho + in.c.c1.mid() * rho +
                        in.c.c2.mid() * (std::pow(2, p - 1.5) * p * rho * 0.3 * std::pow(rho, p - 1) *
                                             std::pow(0.5, p - 1) / std::sqrt(2 * p - 1) + 1e-3);
  EXPECT_NEAR(linf_radius(le, rho, in), expect, 1e-13);
  const auto ac = ProblemSpec::allen_cahn(Rational(1, 10), 10);
  in.u_norm_q = 1.3;
  for (const auto& pr : {le, ac}) {
    double prev = 0;
    for (double r = 0; r < 1; r += 0.05) {
      const double v = linf_radius(pr, r, in);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Pipeline, LaneEmdenCertificateRoundTrip) {
  const auto pr = ProblemSpec::lane_emden(3, 26);
  const SpectralFn u = solve(pr).first;
  const Interval tau = choose_tau(u, pr);
  const InverseBound inv = inverse_bound(u, pr, tau);
  ExistenceOptions opts;
  opts.exact_degree_limit = 60;  // L^12 through the Gauss route keeps this test fast
  const ExistenceCertificate c = verify_existence(u, pr, inv, opts);
  EXPECT_EQ(c.linf_norm_method, "gauss");
  EXPECT_EQ(c.lip_norm_method, "exact");
  EXPECT_GT(c.alpha, 0);
  EXPECT_GE(c.alpha, c.K * c.delta * (1 - 1e-3));
  EXPECT_LE(c.alpha, 2 * c.K * c.delta);
  EXPECT_GT(c.r2, c.alpha);
  EXPECT_TRUE(recheck(c));
  const ExistenceCertificate back = existence_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_TRUE(recheck(back));
  EXPECT_EQ(back.alpha, c.alpha);
  EXPECT_EQ(back.u_hash, spectral_hash(u));
  ExistenceCertificate bad = back;
  bad.alpha *= 0.5;
  bad.rho = bad.alpha;
  EXPECT_FALSE(recheck(bad));
  bad = back;
  bad.r2 *= 0.5;
  EXPECT_FALSE(recheck(bad));
}
