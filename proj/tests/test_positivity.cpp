#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "poscert/approx.hpp"
#include "poscert/positivity.hpp"

using namespace poscert;

namespace {

SpectralFn bump16() {
  SpectralFn f(3);
  f.u(0, 0) = 16;  // 16 x(1-x) y(1-y), max 1 at the centre
  return f;
}

ClassifyOptions shallow(int depth) {
  ClassifyOptions o;
  o.max_depth = depth;
  return o;
}

bool box_contains(const DyadicBox& b, double x, double y) {
  const Box bx = b.box();
  return bx.x.lo() <= x && x <= bx.x.hi() && bx.y.lo() <= y && y <= bx.y.hi();
}

}  // namespace

TEST(Classify, BumpLevelSet) {
  const SpectralFn u = bump16();
  const double r2 = 0.1;
  const auto d = classify_regions(u, r2, shallow(8));
  ASSERT_FALSE(d.omega_plus.empty());
  ASSERT_FALSE(d.omega_minus_cover.empty());
  EXPECT_TRUE(tiles_unit_square(d));
  EXPECT_TRUE(d.touches_outer_boundary);
  // Plus boxes sit strictly above the level set, checked by floating samples.
  for (const auto& b : d.omega_plus) {
    const Box bx = b.box();
    for (double sx : {0.0, 0.5, 1.0})
      for (double sy : {0.0, 0.5, 1.0}) {
        const double x = bx.x.lo() + sx * (bx.x.hi() - bx.x.lo());
        const double y = bx.y.lo() + sy * (bx.y.hi() - bx.y.lo());
        EXPECT_GT(u(x, y), r2);
      }
  }
  // Every point with u <= r2 lies in a cover box.
  for (int i = 0; i <= 64; ++i)
    for (int j = 0; j <= 64; ++j) {
      const double x = i / 64.0, y = j / 64.0;
      if (u(x, y) > r2) continue;
      const bool covered = std::any_of(d.omega_minus_cover.begin(), d.omega_minus_cover.end(),
                                       [&](const DyadicBox& b) { return box_contains(b, x, y); });
      EXPECT_TRUE(covered) << x << " " << y;
    }
  // On the midline y = 1/2 the level set is 4x(1-x) = 0.1; the collar stays
  // within a few boxes of it.
  const double xs = (1 - std::sqrt(1 - 0.1)) / 2;
  const double h = std::ldexp(1.0, -8);
  for (const auto& b : d.omega_minus_cover)
    if (b.box().y.lo() <= 0.5 && 0.5 <= b.box().y.hi() && b.box().x.hi() <= 0.5) {
      EXPECT_LE(b.box().x.lo(), xs + 4 * h);
    }
}

TEST(Classify, EmptyPlusSet) {
  EXPECT_THROW(
      {
        try {
          classify_regions(SpectralFn(4), 1e-3, shallow(6));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::OmegaPlusEmpty);
          throw;
        }
      },
      Error);
  EXPECT_THROW(classify_regions(bump16(), 1.5, shallow(6)), Error);
  EXPECT_THROW(classify_regions(bump16(), 0.0, shallow(6)), Error);
}

TEST(Classify, TilingDetectsGapsAndOverlaps) {
  auto d = classify_regions(bump16(), 0.3, shallow(6));
  ASSERT_TRUE(tiles_unit_square(d));
  auto gap = d;
  gap.omega_minus_cover.pop_back();
  EXPECT_FALSE(tiles_unit_square(gap));
  auto dup = d;
  dup.omega_minus_cover.push_back(dup.omega_plus.front());
  EXPECT_FALSE(tiles_unit_square(dup));
  auto nested = d;
  const DyadicBox b = nested.omega_plus.front();
  nested.omega_plus.push_back(DyadicBox{b.level + 1, 2 * b.ix, 2 * b.iy});
  EXPECT_FALSE(tiles_unit_square(nested));
}

TEST(Minimum, BelowSampledValues) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    SpectralFn u(5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) u.u(i, j) = coef(rng) / (1 + i + j);
    u.u(0, 0) = 12;
    const auto d = classify_regions(u, 0.05, shallow(7));
    const double m = rigorous_min(SpectralRange(u), d.omega_minus_cover, 2, 1);
    for (const auto& b : d.omega_minus_cover) {
      const Box bx = b.box();
      for (double sx : {0.0, 0.37, 1.0})
        for (double sy : {0.0, 0.61, 1.0})
          EXPECT_LE(m, u(bx.x.lo() + sx * (bx.x.hi() - bx.x.lo()), bx.y.lo() + sy * (bx.y.hi() - bx.y.lo())));
    }
    EXPECT_LE(m, 0.0);  // the outer boundary is in the cover and u = 0 there
  }
}

TEST(LaneEmden, ThresholdsFromTable) {
  // m = 0: the threshold is r2^(p-1). Table entries carry ten digits, so
  // the fourth power can drift by a few parts in 1e9.
  const auto a = check_lane_emden(3, 0, 4.363745213e-12);
  EXPECT_LE(a.threshold, 1.904227228e-23 * (1 + 1e-9));
  EXPECT_GE(a.threshold, 1.904227228e-23 * (1 - 1e-9));
  EXPECT_TRUE(a.pass);
  const auto b = check_lane_emden(5, 0, 1.724519836e-10);
  EXPECT_LE(b.threshold, 8.844489601e-40 * (1 + 1e-8));
  EXPECT_TRUE(b.pass);
  const auto c = check_lane_emden(3, 0, 2);
  EXPECT_EQ(c.threshold, 4);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.lambda1_lower, 2 * M_PI * M_PI, 1e-12);
  EXPECT_FALSE(check_lane_emden(3, 0, 5).pass);
  EXPECT_FALSE(check_lane_emden(3, -4.5, 0.1).pass);
}

TEST(LaneEmden, ThresholdMonotoneInRadius) {
  for (int p : {3, 5}) {
    bool failed = false;
    double prev = 0;
    for (double r = 1e-6; r < 10; r *= 1.3) {
      const auto c = check_lane_emden(p, -0.01, r);
      EXPECT_GE(c.threshold, prev);
      prev = c.threshold;
      if (failed) {
        EXPECT_FALSE(c.pass);
      }
      failed = failed || !c.pass;
    }
    EXPECT_TRUE(failed);
  }
}

TEST(AllenCahn, Assumptions) {
  const auto d = classify_regions(bump16(), 0.1, shallow(8));
  const FrameDomain square{};
  const auto big = check_allen_cahn(Rational(1, 10), 0, 0.6, 0.95852e5, d, square);
  EXPECT_FALSE(big.a3);
  EXPECT_FALSE(big.pass);
  for (const Rational& eps : {Rational(1, 10), Rational(1, 40)}) {
    const auto c = check_allen_cahn(eps, -2.54e-3, 1e-5, 0.95852e5, d, square);
    EXPECT_TRUE(c.a3 && c.a4 && c.a5 && c.pass);
  }
  const auto tiny = check_allen_cahn(Rational(1, 1000), 0, 1e-5, 0.95852e5, d, square);
  EXPECT_FALSE(tiny.a5);
  EXPECT_FALSE(check_allen_cahn(Rational(1, 10), -1.5, 1e-5, 0.95852e5, d, square).a4);
}

TEST(AllenCahn, Containment) {
  const FrameDomain frame{Rational(1, 64)};
  // Level-6 boxes on the outer ring sit inside the frame, edges touching a.
  std::vector<DyadicBox> ring{{6, 0, 0}, {6, 0, 31}, {6, 63, 40}, {6, 17, 63}};
  EXPECT_TRUE(cover_inside_frame(ring, frame));
  ring.push_back({6, 1, 30});
  EXPECT_FALSE(cover_inside_frame(ring, frame));
  EXPECT_TRUE(cover_inside_frame(ring, FrameDomain{}));

  const auto d = classify_regions(bump16(), 0.9, shallow(6));  // collar far wider than 1/64
  EXPECT_THROW(
      {
        try {
          check_allen_cahn(Rational(1, 10), 0, 1e-5, 2e4, d, frame);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::ContainmentFailure);
          throw;
        }
      },
      Error);
}

TEST(Assess, NegativeLobeFails) {
  // Tilted bump with a negative lobe on one side, sampled minimum -4.16.
  SpectralFn u(4);
  u.u(0, 0) = 16;
  u.u(1, 0) = -200;
  const auto pr = ProblemSpec::lane_emden(3, 4);
  const auto c = assess(pr, u, 0.5, lambda1_unit_square_data());
  ASSERT_TRUE(c.lane_emden.has_value());
  EXPECT_LE(c.m_lower, -4.16);
  EXPECT_FALSE(c.verdict);
  const auto a5 = std::find_if(c.assumptions.begin(), c.assumptions.end(), [](const Assumption& a) { return a.id == 5; });
  ASSERT_NE(a5, c.assumptions.end());
  EXPECT_FALSE(a5->pass);
  EXPECT_TRUE(recheck(c, u));

  const auto none = assess(pr, u, 100.0, lambda1_unit_square_data());
  EXPECT_FALSE(none.verdict);
  ASSERT_FALSE(none.assumptions.empty());
  EXPECT_EQ(none.assumptions.front().id, 1);
  EXPECT_FALSE(none.assumptions.front().pass);
}

TEST(Assess, BumpPassesAndRoundTrips) {
  const auto pr = ProblemSpec::lane_emden(3, 3);
  CertifyOptions o;
  o.classify = shallow(8);
  const auto c = assess(pr, bump16(), 0.05, lambda1_unit_square_data(), o);
  EXPECT_TRUE(c.verdict);
  EXPECT_TRUE(recheck(c, bump16()));
  const auto back = positivity_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_TRUE(back.verdict);
  EXPECT_TRUE(recheck(back, bump16()));
  auto bad = back;
  bad.m_lower = 0.5;  // claims a minimum the boxes cannot support
  EXPECT_FALSE(recheck(bad, bump16()));
  bad = back;
  bad.decomposition.omega_plus.push_back(bad.decomposition.omega_minus_cover.front());
  bad.decomposition.omega_minus_cover.erase(bad.decomposition.omega_minus_cover.begin());
  EXPECT_FALSE(recheck(bad, bump16()));
}

TEST(Certify, LaneEmdenEndToEnd) {
  const auto pr = ProblemSpec::lane_emden(3, 26);
  const SpectralFn u = solve(pr).first;
  const Interval tau = choose_tau(u, pr);
  ExistenceOptions eo;
  eo.exact_degree_limit = 60;
  const ExistenceCertificate ex = verify_existence(u, pr, inverse_bound(u, pr, tau), eo);
  CertifyOptions o;
  o.classify = shallow(10);
  const auto c = certify(pr, u, ex, lambda1_unit_square_data(), o);
  EXPECT_TRUE(c.verdict);
  EXPECT_EQ(c.r2, ex.r2);
  EXPECT_TRUE(recheck(c, u));

  SpectralFn other = u;
  other.u(1, 1) += 1e-3;
  EXPECT_THROW(certify(pr, other, ex, lambda1_unit_square_data(), o), Error);
  auto tampered = ex;
  tampered.alpha *= 0.25;
  tampered.rho = tampered.alpha;
  EXPECT_THROW(certify(pr, u, tampered, lambda1_unit_square_data(), o), Error);
}
