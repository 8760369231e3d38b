#include "poscert/quadrature.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "poscert/basis.hpp"

namespace poscert {

using namespace rounding;

namespace {

constexpr mpfr_prec_t kPrec = 160;

// Newton refinement of a root of the shifted Legendre polynomial P_m near x0.
double refine_root(int m, double x0) {
  mpfr_t x, t, p0, p1, p2, dp, tmp, tmp2;
  for (mpfr_ptr v : {x, t, p0, p1, p2, dp, tmp, tmp2}) mpfr_init2(v, kPrec);
  mpfr_set_d(x, x0, MPFR_RNDN);
  for (int it = 0; it < 6; ++it) {
    // t = 2x - 1; P_0 = 1, P_1 = t, (n+1) P_{n+1} = (2n+1) t P_n - n P_{n-1}
    mpfr_mul_2ui(t, x, 1, MPFR_RNDN);
    mpfr_sub_ui(t, t, 1, MPFR_RNDN);
    mpfr_set_ui(p0, 1, MPFR_RNDN);
    mpfr_set(p1, t, MPFR_RNDN);
    for (int n = 1; n < m; ++n) {
      mpfr_mul(tmp, t, p1, MPFR_RNDN);
      mpfr_mul_ui(tmp, tmp, static_cast<unsigned long>(2 * n + 1), MPFR_RNDN);
      mpfr_mul_ui(tmp2, p0, static_cast<unsigned long>(n), MPFR_RNDN);
      mpfr_sub(tmp, tmp, tmp2, MPFR_RNDN);
      mpfr_div_ui(p2, tmp, static_cast<unsigned long>(n + 1), MPFR_RNDN);
      mpfr_set(p0, p1, MPFR_RNDN);
      mpfr_set(p1, p2, MPFR_RNDN);
    }
    // p1 = P_m(t), p0 = P_{m-1}(t); dP/dx = 2 m (t P_m - P_{m-1}) / (t^2 - 1)
    mpfr_mul(tmp, t, p1, MPFR_RNDN);
    mpfr_sub(tmp, tmp, p0, MPFR_RNDN);
    mpfr_mul_ui(tmp, tmp, static_cast<unsigned long>(2 * m), MPFR_RNDN);
    mpfr_sqr(tmp2, t, MPFR_RNDN);
    mpfr_sub_ui(tmp2, tmp2, 1, MPFR_RNDN);
    mpfr_div(dp, tmp, tmp2, MPFR_RNDN);
    mpfr_div(tmp, p1, dp, MPFR_RNDN);
    mpfr_sub(x, x, tmp, MPFR_RNDN);
  }
  const double r = mpfr_get_d(x, MPFR_RNDN);
  for (mpfr_ptr v : {x, t, p0, p1, p2, dp, tmp, tmp2}) mpfr_clear(v);
  return r;
}

int sign_at(const std::vector<BigInt>& p, double x) {
  const Interval v = eval_int_poly(p, x, BigInt(1));
  if (v.lo() > 0) return 1;
  if (v.hi() < 0) return -1;
  return 0;  // exact zero (or an enclosure touching it)
}

std::unique_ptr<GaussRule> build_rule(int m) {
  auto rule = std::make_unique<GaussRule>();
  rule->m = m;
  const auto& p = shifted_legendre_int(m);
  std::vector<BigInt> dp(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) dp[static_cast<std::size_t>(k - 1)] = p[static_cast<std::size_t>(k)] * k;
  std::vector<BigInt> ddp(static_cast<std::size_t>(std::max(m - 1, 1)));
  for (int k = 2; k <= m; ++k) ddp[static_cast<std::size_t>(k - 2)] = p[static_cast<std::size_t>(k)] * (k * (k - 1));
  // sup |P_m'''| on [0,1] = (m+3)! / (3! (m-3)!)
  double d3 = 0.0;
  if (m >= 3) {
    d3 = 1.0;
    for (int k = m - 2; k <= m + 3; ++k) d3 = mul_up(d3, static_cast<double>(k));
    d3 = div_up(d3, 6.0);
  }
  double prev_hi = 0.0;
  for (int i = 1; i <= m; ++i) {
    // Roots in increasing x: t_i = -cos(pi (i - 1/4)/(m + 1/2)).
    const long double th = 3.14159265358979323846264338327950288L * (i - 0.25L) / (m + 0.5L);
    const double guess = static_cast<double>(0.5L * (1.0L - std::cos(th)));
    const double x0 = refine_root(m, guess);
    double lo = x0;
    double hi = x0;
    if (sign_at(p, x0) != 0) {
      double r = std::fmax(std::fabs(x0) * 0x1p-52, 0x1p-1074);
      for (;;) {
        lo = std::fmax(x0 - r, 0.0);
        hi = std::fmin(x0 + r, 1.0);
        const int sl = sign_at(p, lo);
        const int sh = sign_at(p, hi);
        if (sl == 0) {
          hi = lo;
          break;
        }
        if (sh == 0) {
          lo = hi;
          break;
        }
        if (sl != sh) break;
        r *= 2.0;
        if (r > 1e-8) throw Error(ErrorCode::VerificationFailure, "cannot isolate Gauss node");
      }
    }
    if (i > 1 && !(lo > prev_hi)) throw Error(ErrorCode::VerificationFailure, "Gauss node enclosures overlap");
    prev_hi = hi;
    const Interval X(lo, hi);
    // w = 1 / (x(1-x) P_m'(x)^2); P_m'(X) by a second-order Taylor form at the midpoint.
    const double xm = X.mid();
    const double rad = std::fmax(sub_up(hi, xm), sub_up(xm, lo));
    Interval dval = eval_int_poly(dp, xm, BigInt(1));
    if (rad > 0) {
      dval += eval_int_poly(ddp, xm, BigInt(1)) * Interval(-rad, rad);
      const double spread = mul_up(mul_up(0.5, d3), mul_up(rad, rad));
      dval += Interval(-spread, spread);
    }
    const Interval W = Interval(1.0) / (X * (1.0 - X) * sqr(dval));
    rule->nodes.push_back(X);
    rule->weights.push_back(W);
    rule->x.push_back(xm);
    rule->w.push_back(W.mid());
  }
  return rule;
}

std::mutex g_rule_mutex;
std::map<int, std::unique_ptr<GaussRule>> g_rules;

}  // namespace

const GaussRule& gauss_legendre(int m) {
  if (m < 1) throw Error(ErrorCode::ArgumentOutOfRange, "Gauss rule needs m >= 1");
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = g_rules.find(m);
  if (it == g_rules.end()) it = g_rules.emplace(m, build_rule(m)).first;
  return *it->second;
}

IntervalMatrix basis_table(const GaussRule& rule, int N) {
  IntervalMatrix t(rule.m, N);
  for (int a = 0; a < rule.m; ++a) {
    const auto vals = basis_enclosures(rule.nodes[static_cast<std::size_t>(a)], N);
    for (int n = 0; n < N; ++n) t.set(a, n, vals[static_cast<std::size_t>(n)]);
  }
  return t;
}

Eigen::MatrixXd basis_table_float(const GaussRule& rule, int N) {
  Eigen::MatrixXd t(rule.m, N);
  std::vector<double> phi(static_cast<std::size_t>(N));
  for (int a = 0; a < rule.m; ++a) {
    basis_values(rule.x[static_cast<std::size_t>(a)], N, phi.data());
    for (int n = 0; n < N; ++n) t(a, n) = phi[static_cast<std::size_t>(n)];
  }
  return t;
}

Eigen::MatrixXd basis_derivative_table_float(const GaussRule& rule, int N) {
  Eigen::MatrixXd t(rule.m, N);
  std::vector<double> phi(static_cast<std::size_t>(N));
  std::vector<double> dphi(static_cast<std::size_t>(N));
  for (int a = 0; a < rule.m; ++a) {
    basis_values(rule.x[static_cast<std::size_t>(a)], N, phi.data(), dphi.data());
    for (int n = 0; n < N; ++n) t(a, n) = dphi[static_cast<std::size_t>(n)];
  }
  return t;
}

}  // namespace poscert
