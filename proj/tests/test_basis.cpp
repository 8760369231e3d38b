#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "poscert/basis.hpp"

using namespace poscert;

namespace {

Poly1D poly(std::initializer_list<long> c) {
  std::vector<Rational> v;
  for (long x : c) v.emplace_back(x);
  return Poly1D(std::move(v));
}

const Poly1D kBubble = poly({0, 1, -1});  // x(1-x)

bool contains_exact(const Interval& r, const Rational& v) { return Rational(r.lo()) <= v && v <= Rational(r.hi()); }

}  // namespace

TEST(Basis, ShiftedLegendreLowOrders) {
  EXPECT_EQ(shifted_legendre(0), poly({1}));
  EXPECT_EQ(shifted_legendre(1), poly({-1, 2}));
  EXPECT_EQ(shifted_legendre(2), poly({1, -6, 6}));
}

TEST(Basis, BasisFunctions) {
  EXPECT_EQ(basis_fn(1), kBubble);
  EXPECT_EQ(basis_fn(2), kBubble * poly({-1, 2}));
  for (int n = 1; n <= 10; ++n) {
    EXPECT_EQ(basis_fn(n)(Rational(0)), 0);
    EXPECT_EQ(basis_fn(n)(Rational(1)), 0);
    // phi_n' = -P_n
    EXPECT_EQ(basis_fn(n).derivative(), Rational(-1) * shifted_legendre(n));
  }
}

TEST(Basis, Orthogonality) {
  for (int m = 0; m <= 12; ++m)
    for (int n = 0; n <= 12; ++n) {
      const Rational v = (shifted_legendre(m) * shifted_legendre(n)).integral01();
      EXPECT_EQ(v, m == n ? Rational(1, 2 * n + 1) : Rational(0));
    }
}

TEST(Basis, Gram1DMatchesDirectIntegration) {
  const int N = 9;
  const Gram1D g = gram_1d(N);
  for (int m = 1; m <= N; ++m)
    for (int n = 1; n <= N; ++n) {
      EXPECT_EQ(g.mass[m - 1][n - 1], (basis_fn(m) * basis_fn(n)).integral01());
      EXPECT_EQ(g.stiffness[m - 1][n - 1], (basis_fn(m).derivative() * basis_fn(n).derivative()).integral01());
    }
}

TEST(Basis, GramMatricesOrderOne) {
  const GramMatrices g = gram_matrices(1, Interval(0.0));
  EXPECT_TRUE(contains_exact(g.stiffness(0, 0), Rational(1, 45)));
  EXPECT_TRUE(contains_exact(g.mass(0, 0), Rational(1, 900)));
  EXPECT_TRUE(g.v_matrix.contains(g.stiffness) && g.stiffness.contains(g.v_matrix));
  const GramMatrices g4 = gram_matrices(4, Interval(0.0));
  EXPECT_TRUE(g4.stiffness.is_symmetric());
  EXPECT_TRUE(g4.mass.is_symmetric());
  const GramMatrices gt = gram_matrices(2, Interval(1.0));
  const IntervalMatrix sum = gt.stiffness + gt.mass;
  EXPECT_TRUE(gt.v_matrix.contains(sum) || sum.contains(gt.v_matrix));
}

TEST(Basis, ExactEvaluationAndEnclosures) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> phi(15);
  for (int it = 0; it < 200; ++it) {
    const double x = u(rng);
    basis_values(x, 15, phi.data());
    for (int n = 1; n <= 15; ++n) {
      const Interval e = eval_int_poly(basis_numerator_int(n), x, BigInt(n * (n + 1)));
      EXPECT_TRUE(contains_exact(e, basis_fn(n)(Rational(x))));
      EXPECT_LE(e.width(), 1e-15);
      EXPECT_NEAR(e.mid(), phi[n - 1], 1e-13);
    }
    const double w = 1e-9 * u(rng);
    const Interval X(std::max(0.0, x - w), std::min(1.0, x + w));
    const auto enc = basis_enclosures(X, 15);
    for (double t : {X.lo(), X.hi(), X.mid()})
      for (int n = 1; n <= 15; ++n) EXPECT_TRUE(contains_exact(enc[n - 1], basis_fn(n)(Rational(t))));
  }
}

TEST(Poly2D, ProductsAndPowers) {
  const Poly2D b = to_poly2d(kBubble, poly({1}));
  const Poly2D b2 = coeff_product(b, b);
  EXPECT_EQ(b2, to_poly2d(kBubble * kBubble, poly({1})));
  // Cube of a single mode against the univariate cube.
  SpectralFn f(3);
  f.u(0, 0) = 1.0;
  const Poly2D p = to_poly2d(f);
  const Poly1D c3 = kBubble * kBubble * kBubble;
  EXPECT_EQ(coeff_power(p, 3), to_poly2d(c3, c3));
  EXPECT_TRUE(coeff_product(p, Poly2D()).is_zero());
  EXPECT_THROW(coeff_product(p, p, 3), Error);
}

TEST(Poly2D, SpectralExpansionIsExact) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0.0, 1.0);
  SpectralFn f(6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) f.u(i, j) = std::ldexp(nd(rng), -3 * (i + j));
  const Poly2D p = to_poly2d(f);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int it = 0; it < 20; ++it) {
    const double x = u(rng);
    const double y = u(rng);
    // Exact reference: sum of u_ij phi_i(x) phi_j(y) in rationals.
    Rational ref = 0;
    for (int i = 1; i <= 6; ++i)
      for (int j = 1; j <= 6; ++j)
        ref += Rational(f.u(i - 1, j - 1)) * basis_fn(i)(Rational(x)) * basis_fn(j)(Rational(y));
    EXPECT_EQ(p(Rational(x), Rational(y)), ref);
    EXPECT_NEAR(f(x, y), ref.get_d(), 1e-12);
  }
}

TEST(Poly2D, Laplacian) {
  const Poly2D f = Poly2D::monomial(2, 2);
  const Poly2D expect = Poly2D::monomial(0, 2, Rational(2)) + Poly2D::monomial(2, 0, Rational(2));
  EXPECT_EQ(laplacian(f), expect);
}

TEST(Poly2D, L2NormSquared) {
  EXPECT_TRUE(contains_exact(l2_norm_sq(Poly2D::constant(Rational(1))), Rational(1)));
  EXPECT_TRUE(contains_exact(l2_norm_sq(to_poly2d(kBubble, poly({1}))), Rational(1, 30)));
  SpectralFn f(1);
  f.u(0, 0) = 1.0;
  EXPECT_TRUE(contains_exact(l2_norm_sq(to_poly2d(f)), Rational(1, 900)));
  EXPECT_EQ(l2_norm_sq(Poly2D()), Interval(0.0));
  // Separable oracle: int (p(x) q(y))^2 = int p^2 * int q^2.
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<long> c(-50, 50);
  for (int it = 0; it < 10; ++it) {
    std::vector<Rational> pc;
    std::vector<Rational> qc;
    for (int k = 0; k < 7; ++k) pc.emplace_back(c(rng), 7);
    for (int k = 0; k < 5; ++k) qc.emplace_back(c(rng), 3);
    const Poly1D pp(pc);
    const Poly1D qq(qc);
    const Rational exact = (pp * pp).integral01() * (qq * qq).integral01();
    const Interval r = l2_norm_sq(to_poly2d(pp, qq));
    EXPECT_TRUE(contains_exact(r, exact));
    EXPECT_LE(r.width(), 1e-14 * std::max(1.0, r.hi()));
    EXPECT_GT(r.hi(), 0.0);
  }
}

TEST(Poly2D, RangeEnclosure) {
  const Poly2D bubble = to_poly2d(kBubble, kBubble);
  const Box unit{Interval(0, 1), Interval(0, 1)};
  const Interval r0 = eval_range(bubble, unit, 0);
  EXPECT_TRUE(r0.contains(Interval(0, 0.0625)));
  EXPECT_EQ(eval_range(Poly2D::constant(Rational(3, 4)), unit, 3), Interval(0.75));
  const Interval rx = eval_range(Poly2D::monomial(1, 0), Box{Interval(0, 0.5), Interval(0, 1)}, 2);
  EXPECT_EQ(rx, Interval(0, 0.5));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpectralFn f(5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) f.u(i, j) = u(rng) - 0.5;
  const Poly2D p = to_poly2d(f);
  const Box b{Interval(0.125, 0.625), Interval(0.25, 1.0)};
  double prev = std::numeric_limits<double>::infinity();
  for (int d = 0; d <= 5; ++d) {
    const Interval r = eval_range(p, b, d);
    EXPECT_LE(r.width(), prev);
    prev = r.width();
    for (int s = 0; s < 50; ++s) {
      const double x = 0.125 + 0.5 * u(rng);
      const double y = 0.25 + 0.75 * u(rng);
      EXPECT_TRUE(contains_exact(r, p(Rational(x), Rational(y))));
    }
  }
}

TEST(SpectralFn, FileRoundTripAndPadding) {
  SpectralFn f(3);
  f.u << 1.0, 1e-300, -0.1, 3.0, 4.0 / 3.0, 0, 0, 0, 5;
  std::stringstream ss;
  write_spectral(ss, f);
  const SpectralFn g = read_spectral(ss);
  EXPECT_EQ(g.u, f.u);
  const SpectralFn h = f.padded(5);
  EXPECT_EQ(h.order(), 5);
  EXPECT_EQ(h(0.3, 0.7), f(0.3, 0.7));
  std::stringstream bad("2\n0x1p0\n");
  EXPECT_THROW(read_spectral(bad), Error);
}
