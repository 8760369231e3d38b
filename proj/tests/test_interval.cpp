#include <gtest/gtest.h>
#include <mpfr.h>

#include <cmath>
#include <random>

#include "poscert/interval.hpp"
#include "poscert/interval_matrix.hpp"
#include "poscert/rational.hpp"

using namespace poscert;

namespace {

bool contains_exact(const Interval& r, const Rational& v) { return Rational(r.lo()) <= v && v <= Rational(r.hi()); }

// High-precision MPFR value compared against interval endpoints.
struct Mp {
  mpfr_t v;
  Mp() { mpfr_init2(v, 256); }
  ~Mp() { mpfr_clear(v); }
  Mp(const Mp&) = delete;
  Mp& operator=(const Mp&) = delete;
  bool inside(const Interval& r) const { return mpfr_cmp_d(v, r.lo()) >= 0 && mpfr_cmp_d(v, r.hi()) <= 0; }
  double get() const { return mpfr_get_d(v, MPFR_RNDN); }
};

double random_double(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-40, 40);
  return std::ldexp(mant(rng), ex(rng));
}

}  // namespace

TEST(Interval, ExactEndpointArithmetic) {
  EXPECT_EQ(Interval(1, 2) + Interval(3, 4), Interval(4, 6));
  EXPECT_EQ(Interval(-1, 2) * Interval(3, 4), Interval(-4, 8));
  EXPECT_EQ(Interval(1, 2) - Interval(3, 4), Interval(-3, -1));
  EXPECT_EQ(Interval(1, 2) / Interval(4, 8), Interval(0.125, 0.5));
}

TEST(Interval, SqrtTwoIsTight) {
  const Interval r = sqrt(Interval(2.0));
  Mp oracle;
  mpfr_set_ui(oracle.v, 2, MPFR_RNDN);
  mpfr_sqrt(oracle.v, oracle.v, MPFR_RNDN);
  EXPECT_TRUE(oracle.inside(r));
  const double ulp = std::nextafter(r.lo(), 2.0) - r.lo();
  EXPECT_LE(r.hi() - r.lo(), 2 * ulp);
}

TEST(Interval, Errors) {
  EXPECT_THROW(Interval(1, 2) / Interval(-1, 1), Error);
  try {
    (void)(Interval(1, 2) / Interval(0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivisionByIntervalContainingZero);
  }
  try {
    (void)sqrt(Interval(-1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeSqrt);
  }
  try {
    (void)gamma_enclosure(Interval(0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveArgument);
  }
  EXPECT_THROW(Interval(2, 1), Error);
}

TEST(Interval, RandomizedContainment) {
  std::mt19937_64 rng(12345);
  int violations = 0;
  for (int it = 0; it < 20000; ++it) {
    const double x = random_double(rng);
    const double y = random_double(rng);
    const Rational qx(x);
    const Rational qy(y);
    const Interval X(x);
    const Interval Y(y);
    if (!contains_exact(X + Y, qx + qy)) ++violations;
    if (!contains_exact(X - Y, qx - qy)) ++violations;
    if (!contains_exact(X * Y, qx * qy)) ++violations;
    if (y != 0 && !contains_exact(X / Y, qx / qy)) ++violations;
    const Interval s = sqrt(Interval(std::fabs(x)));
    if (!(Rational(s.lo()) * Rational(s.lo()) <= abs(qx) && abs(qx) <= Rational(s.hi()) * Rational(s.hi()))) {
      ++violations;
    }
    const int n = static_cast<int>(it % 7);
    Rational p = 1;
    for (int k = 0; k < n; ++k) p *= qx;
    if (!contains_exact(pow(X, n), p)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Interval, MonotoneInclusion) {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> widen(0.0, 1.0);
  int violations = 0;
  for (int it = 0; it < 20000; ++it) {
    double a0 = random_double(rng);
    double a1 = random_double(rng);
    double b0 = random_double(rng);
    double b1 = random_double(rng);
    if (a0 > a1) std::swap(a0, a1);
    if (b0 > b1) std::swap(b0, b1);
    const Interval a(a0, a1);
    const Interval b(b0, b1);
    const Interval A(a0 - widen(rng) * std::fabs(a0), a1 + widen(rng) * std::fabs(a1));
    const Interval B(b0 - widen(rng) * std::fabs(b0), b1 + widen(rng) * std::fabs(b1));
    if (!(A + B).contains(a + b)) ++violations;
    if (!(A - B).contains(a - b)) ++violations;
    if (!(A * B).contains(a * b)) ++violations;
    if (!B.contains_zero() && !(A / B).contains(a / b)) ++violations;
    if (!sqr(A).contains(sqr(a))) ++violations;
    if (!abs(A).contains(abs(a))) ++violations;
    if (!min(A, B).contains(min(a, b))) ++violations;
    if (!max(A, B).contains(max(a, b))) ++violations;
    if (!pow(A, 3).contains(pow(a, 3))) ++violations;
    if (A.lo() > 0 && !sqrt(A).contains(sqrt(a))) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Interval, ElementaryFunctionsAgainstMpfr) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(-20.0, 20.0);
  for (int it = 0; it < 500; ++it) {
    const double x = d(rng);
    Mp e;
    mpfr_set_d(e.v, x, MPFR_RNDN);
    mpfr_exp(e.v, e.v, MPFR_RNDN);
    EXPECT_TRUE(e.inside(exp(Interval(x))));
    const double y = std::fabs(x) + 1e-3;
    Mp l;
    mpfr_set_d(l.v, y, MPFR_RNDN);
    mpfr_log(l.v, l.v, MPFR_RNDN);
    EXPECT_TRUE(l.inside(log(Interval(y))));
    Mp p;
    Mp q;
    mpfr_set_d(p.v, y, MPFR_RNDN);
    mpfr_set_d(q.v, x / 7.0, MPFR_RNDN);
    mpfr_pow(p.v, p.v, q.v, MPFR_RNDN);
    EXPECT_TRUE(p.inside(pow(Interval(y), Interval(x / 7.0))));
  }
  Mp pi_oracle;
  mpfr_const_pi(pi_oracle.v, MPFR_RNDN);
  EXPECT_TRUE(pi_oracle.inside(pi()));
}

TEST(Gamma, FactorialsAtIntegers) {
  double fact = 1.0;
  for (int n = 1; n <= 10; ++n) {
    if (n > 1) fact *= (n - 1);
    const Interval g = gamma_enclosure(Interval(static_cast<double>(n)));
    EXPECT_TRUE(g.contains(fact)) << n << " " << g;
  }
}

TEST(Gamma, HalfAndFiveThirds) {
  Mp sqrt_pi;
  mpfr_const_pi(sqrt_pi.v, MPFR_RNDN);
  mpfr_sqrt(sqrt_pi.v, sqrt_pi.v, MPFR_RNDN);
  EXPECT_TRUE(sqrt_pi.inside(gamma_enclosure(Interval(0.5))));

  const Interval t = to_interval(Rational(5, 3));
  const Interval g = gamma_enclosure(t);
  // Oracle: MPFR's gamma at 256 bits on both endpoints; Gamma is increasing here.
  Mp lo;
  Mp hi;
  mpfr_set_d(lo.v, t.lo(), MPFR_RNDN);
  mpfr_gamma(lo.v, lo.v, MPFR_RNDN);
  mpfr_set_d(hi.v, t.hi(), MPFR_RNDN);
  mpfr_gamma(hi.v, hi.v, MPFR_RNDN);
  EXPECT_TRUE(lo.inside(g));
  EXPECT_TRUE(hi.inside(g));
  EXPECT_NEAR(g.mid(), 0.9027452929509336, 1e-12);
  EXPECT_LE(g.width() / g.mid(), 1e-10);
}

TEST(Gamma, WideIntervalsCoverTheMinimum) {
  const Interval g = gamma_enclosure(Interval(1.2, 1.8));
  Mp m;
  mpfr_set_d(m.v, 1.4616321449683623, MPFR_RNDN);
  mpfr_gamma(m.v, m.v, MPFR_RNDN);
  EXPECT_TRUE(m.inside(g));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.3, 30.0);
  for (int it = 0; it < 200; ++it) {
    double a = d(rng);
    double b = d(rng);
    if (a > b) std::swap(a, b);
    const Interval G = gamma_enclosure(Interval(a, b));
    const double t = a + (b - a) * 0.37;
    Mp v;
    mpfr_set_d(v.v, t, MPFR_RNDN);
    mpfr_gamma(v.v, v.v, MPFR_RNDN);
    EXPECT_TRUE(v.inside(G)) << a << " " << b;
  }
}

TEST(Interval, HexRoundTrip) {
  const Interval x(0.5, 0.75);
  EXPECT_EQ(to_hex(x), "[0x1p-1, 0x1.8p-1]");
  EXPECT_EQ(parse_interval("[0x1.0p-1, 0x1.8p-1]"), x);
  std::mt19937_64 rng(3);
  for (int it = 0; it < 1000; ++it) {
    const double v = random_double(rng);
    EXPECT_EQ(parse_hex(to_hex(v)), v);
  }
  EXPECT_THROW(parse_interval("[1, 0]"), Error);
  EXPECT_THROW(parse_interval("1, 2"), Error);
}

TEST(Rational, ParseAndEnclose) {
  EXPECT_EQ(parse_rational("0.1"), Rational(1, 10));
  EXPECT_EQ(parse_rational("5/512"), Rational(5, 512));
  EXPECT_EQ(parse_rational("0.009765625"), Rational(5, 512));
  EXPECT_EQ(parse_rational("-2.5e-2"), Rational(-1, 40));
  EXPECT_THROW(parse_rational("abc"), Error);
  EXPECT_THROW(parse_rational("1/0"), Error);
  const Interval t = to_interval(Rational(1, 10));
  EXPECT_TRUE(contains_exact(t, Rational(1, 10)));
  EXPECT_EQ(std::nextafter(t.lo(), 1.0), t.hi());
  EXPECT_TRUE(to_interval(Rational(3, 4)).is_point());
  // Far outside the binary64 range in numerator and denominator.
  BigInt big;
  mpz_ui_pow_ui(big.get_mpz_t(), 3, 2000);
  const Interval r = ratio_to_interval(big * 7, big * 11);
  EXPECT_TRUE(contains_exact(r, Rational(7, 11)));
  EXPECT_LE(r.width(), 1e-15);
}

TEST(IntervalMatrix, SpectralNormBounds) {
  EXPECT_GE(spectral_norm_upper(IntervalMatrix::identity(2)).hi(), 1.0);
  EXPECT_LE(spectral_norm_upper(IntervalMatrix::identity(2)).hi(), 1.0 + 1e-12);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = -4;
  EXPECT_GE(spectral_norm_upper(IntervalMatrix::from_point(d)).hi(), 4.0);
  std::mt19937_64 rng(11);
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(5, 5, [&]() { return random_double(rng); });
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::JacobiSVD<MatL> svd(a.cast<long double>());
    EXPECT_GE(static_cast<long double>(spectral_norm_upper(IntervalMatrix::from_point(a)).hi()),
              svd.singularValues()(0));
  }
  try {
    (void)spectral_norm_upper(IntervalMatrix(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonSquare);
  }
}

TEST(IntervalMatrix, ProductContainsExactProducts) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int it = 0; it < 30; ++it) {
    const int n = 1 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd am = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return random_double(rng); });
    Eigen::MatrixXd bm = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return random_double(rng); });
    Eigen::MatrixXd ar = am.cwiseAbs() * 1e-3;
    Eigen::MatrixXd br = bm.cwiseAbs() * 1e-3;
    const auto A = IntervalMatrix::from_mid_rad(am, ar);
    const auto B = IntervalMatrix::from_mid_rad(bm, br);
    const IntervalMatrix C = A * B;
    // Random point members, exact product in rationals.
    Eigen::MatrixXd pa(n, n);
    Eigen::MatrixXd pb(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        pa(i, j) = A.lo()(i, j) + u(rng) * (A.hi()(i, j) - A.lo()(i, j));
        pa(i, j) = std::clamp(pa(i, j), A.lo()(i, j), A.hi()(i, j));
        pb(i, j) = B.lo()(i, j) + u(rng) * (B.hi()(i, j) - B.lo()(i, j));
        pb(i, j) = std::clamp(pb(i, j), B.lo()(i, j), B.hi()(i, j));
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Rational s = 0;
        for (int k = 0; k < n; ++k) s += Rational(pa(i, k)) * Rational(pb(k, j));
        EXPECT_TRUE(contains_exact(C(i, j), s));
        Rational t = 0;
        for (int k = 0; k < n; ++k) t += Rational(am(i, k)) * Rational(bm(k, j));
        EXPECT_TRUE(contains_exact((am * IntervalMatrix::from_point(bm))(i, j), t));
      }
  }
}
