#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "poscert/approx.hpp"
#include "poscert/eigen.hpp"
#include "poscert/verified_pd.hpp"

using namespace poscert;

namespace {

constexpr double kPi = std::numbers::pi;

// Number of negative pivots of an LDL^T of A - sigma B in long double
// (Sylvester inertia), an eigenvalue count independent of the enclosure code.
int count_below(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double sigma) {
  const Eigen::Index n = A.rows();
  std::vector<std::vector<long double>> M(static_cast<std::size_t>(n), std::vector<long double>(static_cast<std::size_t>(n)));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<long double>(A(i, j)) - static_cast<long double>(sigma) * B(i, j);
  int neg = 0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
    const long double d = M[k][k];
    if (d < 0) ++neg;
    for (std::size_t i = k + 1; i < static_cast<std::size_t>(n); ++i) {
      const long double f = M[i][k] / d;
      for (std::size_t j = k + 1; j < static_cast<std::size_t>(n); ++j) M[i][j] -= f * M[k][j];
    }
  }
  return neg;
}

SpectralFn zero_fn(int N) { return SpectralFn(N); }

std::string write_table(const std::map<std::string, std::string>& entries) {
  nlohmann::json j;
  j["dimension"] = 2;
  for (const auto& [k, v] : entries) j["entries"][k] = v;
  const std::string path = ::testing::TempDir() + "/proj_table.json";
  std::ofstream(path) << j.dump();
  return path;
}

}  // namespace

TEST(Eigen, ScalarCase) {
  const ProblemSpec le = ProblemSpec::lane_emden(3, 1);
  const Gevp g = assemble_gevp(zero_fn(1), le, Interval(1.0), 1);
  // A = 1/45 + 1/900 (phi_1 = x(1-x): ||phi'||^2 = 1/3, ||phi||^2 = 1/30), B = 1/900.
  EXPECT_TRUE(g.A(0, 0).contains(1.0 / 45 + 1.0 / 900));
  EXPECT_TRUE(g.B(0, 0).contains(1.0 / 900));
  const auto up = ritz_upper_bounds(g.A, g.B, 1);
  ASSERT_EQ(up.size(), 1u);
  EXPECT_GE(up[0], 21.0);
  EXPECT_LE(up[0], 21.0 + 1e-9);
  const auto enc = enclose_gevp(g.A, g.B, 1);
  EXPECT_TRUE(enc[0].contains(21.0));
}

TEST(Eigen, DiagonalPencil) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = 2;
  A(1, 1) = 6;
  const auto I = IntervalMatrix::identity(2);
  const auto up = ritz_upper_bounds(IntervalMatrix::from_point(A), I, 2);
  EXPECT_GE(up[0], 2.0);
  EXPECT_GE(up[1], 6.0);
  EXPECT_LE(up[0], 2.0 + 1e-12);
  EXPECT_LE(up[1], 6.0 + 1e-12);
  const auto enc = enclose_gevp(IntervalMatrix::from_point(A), I, 2);
  EXPECT_TRUE(enc[0].contains(2.0));
  EXPECT_TRUE(enc[1].contains(6.0));
}

TEST(Eigen, LaplacianOracle) {
  const ProblemSpec le = ProblemSpec::lane_emden(3, 20);
  const Gevp g = assemble_gevp(zero_fn(20), le, Interval(1.0), 20);
  EXPECT_TRUE(g.A.is_symmetric());
  EXPECT_TRUE(g.B.is_symmetric());
  GevpEnclosure ge(g.A, g.B);
  const Interval l1 = ge.enclose(1);
  const double exact1 = 2 * kPi * kPi + 1;
  EXPECT_TRUE(l1.contains(exact1)) << l1;
  EXPECT_LE(l1.width() / exact1, 1e-6);
  // pi^2 (1 + 4) + 1 is double (modes (1,2) and (2,1)), then pi^2 (4 + 4) + 1.
  const double exact2 = 5 * kPi * kPi + 1;
  EXPECT_TRUE(ge.enclose(2).contains(exact2));
  EXPECT_TRUE(ge.enclose(3).contains(exact2));
  EXPECT_TRUE(ge.enclose(4).contains(8 * kPi * kPi + 1));
}

TEST(Eigen, RitzBoundsNonIncreasingInN) {
  const ProblemSpec le = ProblemSpec::lane_emden(3, 20);
  std::vector<std::vector<Interval>> enc;
  for (int N : {5, 10, 20}) {
    const Gevp g = assemble_gevp(zero_fn(N), le, Interval(1.0), N);
    GevpEnclosure ge(g.A, g.B);
    std::vector<Interval> e;
    for (int k = 1; k <= 8; ++k) e.push_back(ge.enclose(k));
    enc.push_back(e);
  }
  for (std::size_t a = 0; a + 1 < enc.size(); ++a)
    for (std::size_t k = 0; k < 8; ++k) {
      // The discrete eigenvalues are non-increasing; the certified bounds
      // may only differ by their own width once the discretization error is
      // below rounding level.
      EXPECT_LE(enc[a + 1][k].hi(), enc[a][k].hi() + enc[a + 1][k].width()) << "k=" << k + 1 << " step " << a;
      EXPECT_LE(enc[a + 1][k].lo(), enc[a][k].hi());
    }
  // Where discretization error dominates, the bound strictly improves.
  EXPECT_LT(enc[1][7].hi(), enc[0][7].hi());
}

TEST(Eigen, EnclosuresAgreeWithInertiaCount) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    Eigen::MatrixXd F(n, n), G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        F(i, j) = nd(rng);
        G(i, j) = nd(rng);
      }
    const Eigen::MatrixXd A = F * F.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd B = G * G.transpose() + Eigen::MatrixXd::Identity(n, n);
    B = 0.5 * (B + B.transpose()).eval();
    const Eigen::MatrixXd As = 0.5 * (A + A.transpose());
    const auto enc = enclose_gevp(IntervalMatrix::from_point(As), IntervalMatrix::from_point(B), n);
    for (int k = 1; k <= n; ++k) {
      const Interval& e = enc[static_cast<std::size_t>(k - 1)];
      ASSERT_LE(e.lo(), e.hi());
      EXPECT_LE(count_below(As, B, e.lo()), k - 1) << "trial " << trial << " k " << k;
      EXPECT_GE(count_below(As, B, e.hi() * (1 + 1e-12)), k) << "trial " << trial << " k " << k;
    }
  }
}

TEST(Eigen, LaneEmdenSolutionIsOwnEigenfunction) {
  // -Laplace u = u^3 = (1/3) (3u^2) u, so lambda = 1/3 for the weight 3u^2.
  const ProblemSpec le = ProblemSpec::lane_emden(3, 12);
  const auto [u, rep] = solve(le);
  ASSERT_TRUE(rep.converged);
  const Gevp g = assemble_gevp(u, le, Interval(0.0), 12);
  GevpEnclosure ge(g.A, g.B);
  const Interval l1 = ge.enclose(1);
  EXPECT_NEAR(l1.lo(), 1.0 / 3, 1e-8);
  EXPECT_NEAR(l1.hi(), 1.0 / 3, 1e-8);
  EXPECT_GT(ge.lower(2), 1.0);
}

TEST(Eigen, WeightGuards) {
  const ProblemSpec le = ProblemSpec::lane_emden(3, 4);
  try {
    (void)assemble_gevp(zero_fn(4), le, Interval(0.0), 4);
    FAIL() << "expected NonPositiveWeight";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveWeight);
  }
  const ProblemSpec ac = ProblemSpec::allen_cahn(Rational(1, 10), 4);
  EXPECT_EQ(choose_tau(zero_fn(4), ac).hi(), 0.0);
  EXPECT_EQ(choose_tau(zero_fn(4), le).hi(), 0.0);
  // M = 1: eps^-2 (3 - 1) = 200, so the first integer above is 201.
  EXPECT_EQ(choose_tau(ac, 1.0).lo(), 201.0);
  EXPECT_EQ(weight_sup(ac, Interval(201.0), 1.0), 301.0);
  EXPECT_EQ(weight_sup(le, Interval(0.0), 2.0), 12.0);
  SpectralFn plateau(4);
  plateau.u(0, 0) = 16.0;  // peak 1 at the centre
  try {
    (void)assemble_gevp(plateau, ac, Interval(0.0), 4);
    FAIL() << "expected NonPositiveWeight";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveWeight);
  }
  EXPECT_NO_THROW((void)assemble_gevp(plateau, ac, choose_tau(plateau, ac), 4));
}

TEST(Eigen, LowerBoundsFormula) {
  const auto lb = lower_bounds({21.0}, 0.1, 1.0);
  EXPECT_NEAR(lb[0], 21.0 / 1.21, 1e-13);
  EXPECT_LE(lb[0], 21.0 / 1.21);
  EXPECT_EQ(lower_bounds({21.0}, 0.0, 5.0)[0], 21.0);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ud(0.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double l = ud(rng);
    EXPECT_LE(lower_bounds({l}, ud(rng) / 100, ud(rng))[0], l);
  }
}

TEST(Eigen, InverseBoundK) {
  const KBound kb = inverse_bound_K({EigEnclosure{1, 2.0, 2.1}}, 10.0);
  EXPECT_GE(kb.mu0_lower, 0.5 - 1e-15);
  EXPECT_LE(kb.K, 2.0 + 1e-12);
  EXPECT_GE(kb.K * kb.mu0_lower, 1.0);
  try {
    (void)inverse_bound_K({EigEnclosure{1, 0.9, 1.1}}, 10.0);
    FAIL() << "expected EigenvalueStraddlesOne";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EigenvalueStraddlesOne);
  }
  // All eigenvalues >= 2: mu0 >= 1/2 for any M.
  for (int M = 1; M <= 5; ++M) {
    std::vector<EigEnclosure> eigs;
    for (int k = 1; k <= M; ++k) eigs.push_back(EigEnclosure{k, 2.0 + k, 3.0 + k});
    EXPECT_LE(inverse_bound_K(eigs, 2.0 + M + 1).K, 2.0 + 1e-12);
  }
  // lambda < 1 side: |1 - 1/lambda| = 1/lambda - 1.
  const KBound small = inverse_bound_K({EigEnclosure{1, 0.6, 0.8}}, 4.0);
  EXPECT_NEAR(small.mu0_lower, 0.25, 1e-12);
  EXPECT_LE(small.mu0_lower, 0.25);
  try {
    (void)inverse_bound_K({EigEnclosure{1, 2.0, 2.1}}, 1.5);
    FAIL() << "expected TailTooShort";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TailTooShort);
  }
}

TEST(Eigen, ProjectionConstants) {
  const std::string path = write_table({{"7", "0x1.999999999999ap-4"}});
  const double c0 = projection_constant_zero(7, path);
  EXPECT_EQ(c0, 0.1);
  EXPECT_EQ(projection_constant(7, Interval(0.0), path), c0);
  const double c3 = projection_constant(7, Interval(3.0), path);
  EXPECT_GE(c3, 0.1 * std::sqrt(1.03));
  EXPECT_NEAR(c3, 0.1 * std::sqrt(1.03), 1e-15);
  try {
    (void)projection_constant_zero(8, path);
    FAIL() << "expected MissingConstant";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingConstant);
  }
  std::remove(path.c_str());

  // Shipped table: decreasing in N and an upper bound of 1/(2 sqrt((N+1)(N+2))).
  double prev = 1e300;
  for (int N = 1; N <= 200; ++N) {
    const double c = projection_constant_zero(N);
    EXPECT_LT(c, prev);
    const long double exact = 1.0L / (2.0L * std::sqrt(static_cast<long double>((N + 1) * (N + 2))));
    EXPECT_GE(static_cast<long double>(c), exact);
    EXPECT_LE(static_cast<long double>(c), exact * (1 + 1e-14L));
    EXPECT_LT(projection_constant(N, Interval(2.0)), projection_constant(std::max(1, N - 1), Interval(2.0)) + (N == 1));
    prev = c;
  }
}

TEST(Eigen, VerifiedPdSmallCases) {
  Eigen::MatrixXd A(2, 2);
  A << 2, 1, 1, 2;
  EXPECT_TRUE(verified_pd(IntervalMatrix::from_point(A)));
  A << 1, 1, 1, 1;  // singular
  EXPECT_FALSE(verified_pd(IntervalMatrix::from_point(A)));
  A << 1, 2, 2, 1;
  EXPECT_FALSE(verified_pd(IntervalMatrix::from_point(A)));
  // Band version agrees on a tridiagonal Laplacian.
  const int n = 200;
  BandMatrix T(n, 1);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    T.add(i, i, Interval(2.0));
    D(i, i) = 2.0;
    if (i + 1 < n) {
      T.add(i + 1, i, Interval(-1.0));
      D(i + 1, i) = D(i, i + 1) = -1.0;
    }
  }
  EXPECT_TRUE(verified_pd(T));
  EXPECT_TRUE(verified_pd(IntervalMatrix::from_point(D)));
  // Smallest eigenvalue 2 - 2 cos(pi/(n+1)) ~ 2.4e-4; shifting past it must fail.
  const double lmin = 2 - 2 * std::cos(kPi / (n + 1));
  BandMatrix Ts(n, 1);
  for (int i = 0; i < n; ++i) {
    Ts.add(i, i, Interval(2.0 - 1.001 * lmin));
    if (i + 1 < n) Ts.add(i + 1, i, Interval(-1.0));
  }
  EXPECT_FALSE(verified_pd(Ts));
  BandMatrix Tp(n, 1);
  for (int i = 0; i < n; ++i) {
    Tp.add(i, i, Interval(2.0 - 0.99 * lmin));
    if (i + 1 < n) Tp.add(i + 1, i, Interval(-1.0));
  }
  EXPECT_TRUE(verified_pd(Tp));
}
