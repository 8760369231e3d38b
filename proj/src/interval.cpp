#include "poscert/interval.hpp"

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace poscert {

using namespace rounding;

double Interval::mid() const noexcept {
  if (std::isfinite(lo_) && std::isfinite(hi_)) {
    const double m = 0.5 * lo_ + 0.5 * hi_;
    return std::clamp(m, lo_, hi_);
  }
  if (std::isfinite(lo_)) return lo_;
  if (std::isfinite(hi_)) return hi_;
  return 0.0;
}

Interval operator*(const Interval& a, const Interval& b) {
  if (a.lo() >= 0 && b.lo() >= 0) {
    return Interval(mul_down(a.lo(), b.lo()), mul_up(a.hi(), b.hi()));
  }
  const std::array<double, 4> ea{a.lo(), a.lo(), a.hi(), a.hi()};
  const std::array<double, 4> eb{b.lo(), b.hi(), b.lo(), b.hi()};
  double lo = kInf;
  double hi = -kInf;
  for (int k = 0; k < 4; ++k) {
    lo = std::fmin(lo, mul_down(ea[k], eb[k]));
    hi = std::fmax(hi, mul_up(ea[k], eb[k]));
  }
  return Interval(lo, hi);
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) {
    throw Error(ErrorCode::DivisionByIntervalContainingZero, "divisor interval contains zero");
  }
  const std::array<double, 4> ea{a.lo(), a.lo(), a.hi(), a.hi()};
  const std::array<double, 4> eb{b.lo(), b.hi(), b.lo(), b.hi()};
  double lo = kInf;
  double hi = -kInf;
  for (int k = 0; k < 4; ++k) {
    if (std::isinf(ea[k]) && std::isinf(eb[k])) {
      // inf/inf: the corner is approached along finite values; bound it coarsely.
      lo = -kInf;
      hi = kInf;
      continue;
    }
    lo = std::fmin(lo, div_down(ea[k], eb[k]));
    hi = std::fmax(hi, div_up(ea[k], eb[k]));
  }
  return Interval(lo, hi);
}

Interval sqr(const Interval& x) {
  if (x.lo() >= 0) return Interval(mul_down(x.lo(), x.lo()), mul_up(x.hi(), x.hi()));
  if (x.hi() <= 0) return Interval(mul_down(x.hi(), x.hi()), mul_up(x.lo(), x.lo()));
  const double m = x.mag();
  return Interval(0.0, mul_up(m, m));
}

Interval sqrt(const Interval& x) {
  if (x.lo() < 0) throw Error(ErrorCode::NegativeSqrt, "sqrt of interval with negative part");
  return Interval(sqrt_down(x.lo()), sqrt_up(x.hi()));
}

namespace {

// Bounds of t^n for t >= 0 by repeated directed multiplication.
double pow_nonneg_down(double t, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r = mul_down(r, t);
  return r;
}

double pow_nonneg_up(double t, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r = mul_up(r, t);
  return r;
}

Interval pow_natural(const Interval& x, int n) {
  if (n == 0) return Interval(1.0);
  if (x.lo() >= 0) return Interval(pow_nonneg_down(x.lo(), n), pow_nonneg_up(x.hi(), n));
  if (x.hi() <= 0) {
    const Interval p(pow_nonneg_down(-x.hi(), n), pow_nonneg_up(-x.lo(), n));
    return (n % 2 == 0) ? p : -p;
  }
  if (n % 2 == 0) return Interval(0.0, pow_nonneg_up(x.mag(), n));
  return Interval(-pow_nonneg_up(-x.lo(), n), pow_nonneg_up(x.hi(), n));
}

}  // namespace

Interval pow(const Interval& x, int n) {
  if (n >= 0) return pow_natural(x, n);
  return Interval(1.0) / pow_natural(x, -n);
}

Interval abs(const Interval& x) {
  if (x.lo() >= 0) return x;
  if (x.hi() <= 0) return -x;
  return Interval(0.0, x.mag());
}

Interval min(const Interval& a, const Interval& b) {
  return Interval(std::fmin(a.lo(), b.lo()), std::fmin(a.hi(), b.hi()));
}

Interval max(const Interval& a, const Interval& b) {
  return Interval(std::fmax(a.lo(), b.lo()), std::fmax(a.hi(), b.hi()));
}

Interval hull(const Interval& a, const Interval& b) {
  return Interval(std::fmin(a.lo(), b.lo()), std::fmax(a.hi(), b.hi()));
}

Interval intersect(const Interval& a, const Interval& b) {
  const double lo = std::fmax(a.lo(), b.lo());
  const double hi = std::fmin(a.hi(), b.hi());
  if (lo > hi) throw Error(ErrorCode::ArgumentOutOfRange, "intersection of disjoint intervals");
  return Interval(lo, hi);
}

namespace {

using MpfrUnary = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

double mpfr_eval(MpfrUnary fn, double x, mpfr_rnd_t rnd) {
  mpfr_t a;
  mpfr_init2(a, 53);
  mpfr_set_d(a, x, MPFR_RNDN);
  fn(a, a, rnd);
  const double r = mpfr_get_d(a, rnd);
  mpfr_clear(a);
  return r;
}

double mpfr_pow_d(double x, double y, mpfr_rnd_t rnd) {
  mpfr_t a;
  mpfr_t b;
  mpfr_init2(a, 53);
  mpfr_init2(b, 53);
  mpfr_set_d(a, x, MPFR_RNDN);
  mpfr_set_d(b, y, MPFR_RNDN);
  mpfr_pow(a, a, b, rnd);
  const double r = mpfr_get_d(a, rnd);
  mpfr_clear(a);
  mpfr_clear(b);
  return r;
}

}  // namespace

Interval exp(const Interval& x) {
  return Interval(mpfr_eval(mpfr_exp, x.lo(), MPFR_RNDD), mpfr_eval(mpfr_exp, x.hi(), MPFR_RNDU));
}

Interval log(const Interval& x) {
  if (x.lo() <= 0) throw Error(ErrorCode::NonPositiveArgument, "log of non-positive interval");
  return Interval(mpfr_eval(mpfr_log, x.lo(), MPFR_RNDD), mpfr_eval(mpfr_log, x.hi(), MPFR_RNDU));
}

Interval pow(const Interval& x, const Interval& y) {
  if (x.lo() <= 0) throw Error(ErrorCode::NonPositiveArgument, "real power of non-positive base");
  // x^y is monotone in each argument separately, so the extremes sit at corners.
  double lo = kInf;
  double hi = -kInf;
  for (double bx : {x.lo(), x.hi()}) {
    for (double by : {y.lo(), y.hi()}) {
      lo = std::fmin(lo, mpfr_pow_d(bx, by, MPFR_RNDD));
      hi = std::fmax(hi, mpfr_pow_d(bx, by, MPFR_RNDU));
    }
  }
  return Interval(lo, hi);
}

Interval pi() { return Interval(0x1.921fb54442d18p+1, 0x1.921fb54442d19p+1); }

namespace {

// B_{2k} as exact num/den, k = 1..11.
constexpr std::array<std::pair<double, double>, 11> kBernoulli{{
    {1, 6},
    {-1, 30},
    {1, 42},
    {-1, 30},
    {5, 66},
    {-691, 2730},
    {7, 6},
    {-3617, 510},
    {43867, 798},
    {-174611, 330},
    {854513, 138},
}};

constexpr int kStirlingTerms = 10;
constexpr double kShift = 20.0;

// Gamma on a thin interval t (t.lo > 0): shift up with the recurrence, then
// Stirling's series for log Gamma with the first omitted term as remainder.
Interval gamma_point(const Interval& t) {
  Interval z = t;
  Interval prod(1.0);
  while (z.lo() < kShift) {
    prod *= z;
    z = z + 1.0;
  }
  const Interval two_pi = 2.0 * pi();
  Interval lg = (z - 0.5) * log(z) - z + 0.5 * log(two_pi);
  const Interval zinv = Interval(1.0) / z;
  const Interval zinv2 = sqr(zinv);
  Interval zpow = zinv;  // z^{-(2k-1)}
  for (int k = 1; k <= kStirlingTerms; ++k) {
    const auto [num, den] = kBernoulli[k - 1];
    const Interval coeff = Interval(num) / Interval(den * (2.0 * k) * (2.0 * k - 1.0));
    lg += coeff * zpow;
    zpow *= zinv2;
  }
  {
    const auto [num, den] = kBernoulli[kStirlingTerms];
    const int m = 2 * kStirlingTerms + 2;
    const Interval bound = Interval(std::fabs(num)) / Interval(den * m * (m - 1.0)) * zpow;
    lg += Interval(-bound.hi(), bound.hi());
  }
  return exp(lg) / prod;
}

// Location and value of the positive minimum of Gamma, bracketed loosely.
constexpr double kArgMinLo = 1.4616;
constexpr double kArgMinHi = 1.4617;
constexpr double kMinValueLower = 0.8856;

}  // namespace

Interval gamma_enclosure(const Interval& x) {
  if (!(x.lo() > 0)) throw Error(ErrorCode::NonPositiveArgument, "gamma requires a positive argument");
  if (!x.is_bounded()) throw Error(ErrorCode::ArgumentOutOfRange, "gamma of unbounded interval");
  const Interval glo = gamma_point(Interval(x.lo()));
  if (x.is_point()) return glo;
  const Interval ghi = gamma_point(Interval(x.hi()));
  if (x.hi() <= kArgMinLo) return Interval(ghi.lo(), glo.hi());
  if (x.lo() >= kArgMinHi) return Interval(glo.lo(), ghi.hi());
  return Interval(std::fmin(kMinValueLower, std::fmin(glo.lo(), ghi.lo())), std::fmax(glo.hi(), ghi.hi()));
}

std::string to_hex(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%a", x);
  return std::string(buf.data());
}

double parse_hex(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  const std::string str(s);
  if (str.empty()) throw Error(ErrorCode::ParseError, "empty number");
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size() || std::isnan(v)) {
    throw Error(ErrorCode::ParseError, "bad floating-point literal '" + str + "'");
  }
  return v;
}

std::string to_hex(const Interval& x) { return "[" + to_hex(x.lo()) + ", " + to_hex(x.hi()) + "]"; }

Interval parse_interval(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw Error(ErrorCode::ParseError, "interval must be written as [lo, hi]");
  }
  s = s.substr(1, s.size() - 2);
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) throw Error(ErrorCode::ParseError, "interval missing comma");
  const double lo = parse_hex(s.substr(0, comma));
  const double hi = parse_hex(s.substr(comma + 1));
  if (lo > hi) throw Error(ErrorCode::ParseError, "interval endpoints out of order");
  return Interval(lo, hi);
}

std::ostream& operator<<(std::ostream& os, const Interval& x) { return os << to_hex(x); }

}  // namespace poscert
