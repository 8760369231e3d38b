#pragma once

// Closed real intervals over binary64 with outward rounding.
//
// Directed rounding is emulated with error-free transformations (TwoSum and
// FMA-based product/quotient/root residuals): every operation computes the
// round-to-nearest result, recovers the exact sign of its rounding error and
// steps one ulp outward only when the error points the wrong way. The
// floating-point environment is never modified, so intervals are safe to
// use from any number of threads.

#include <cmath>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>

#include "poscert/error.hpp"

namespace poscert {

namespace rounding {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMax = std::numeric_limits<double>::max();
// Below this magnitude the FMA/TwoSum residuals may fall into the subnormal
// range and stop being exact; results are then widened by one ulp instead.
inline constexpr double kTiny = 0x1p-960;

inline double next_down(double x) noexcept { return std::nextafter(x, -kInf); }
inline double next_up(double x) noexcept { return std::nextafter(x, kInf); }

inline double add_down(double a, double b) noexcept {
  const double s = a + b;
  if (!std::isfinite(s)) {
    return (s == kInf && std::isfinite(a) && std::isfinite(b)) ? kMax : s;
  }
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return e < 0 ? next_down(s) : s;
}

inline double add_up(double a, double b) noexcept {
  const double s = a + b;
  if (!std::isfinite(s)) {
    return (s == -kInf && std::isfinite(a) && std::isfinite(b)) ? -kMax : s;
  }
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return e > 0 ? next_up(s) : s;
}

inline double sub_down(double a, double b) noexcept { return add_down(a, -b); }
inline double sub_up(double a, double b) noexcept { return add_up(a, -b); }

inline double mul_down(double a, double b) noexcept {
  if (a == 0.0 || b == 0.0) return 0.0;
  const double p = a * b;
  if (!std::isfinite(p)) {
    return (p == kInf && std::isfinite(a) && std::isfinite(b)) ? kMax : p;
  }
  if (std::fabs(p) < kTiny) return next_down(p);
  const double e = std::fma(a, b, -p);
  return e < 0 ? next_down(p) : p;
}

inline double mul_up(double a, double b) noexcept {
  if (a == 0.0 || b == 0.0) return 0.0;
  const double p = a * b;
  if (!std::isfinite(p)) {
    return (p == -kInf && std::isfinite(a) && std::isfinite(b)) ? -kMax : p;
  }
  if (std::fabs(p) < kTiny) return next_up(p);
  const double e = std::fma(a, b, -p);
  return e > 0 ? next_up(p) : p;
}

inline double div_down(double a, double b) noexcept {
  if (a == 0.0) return 0.0;
  const double q = a / b;
  if (!std::isfinite(q)) {
    return (q == kInf && std::isfinite(a)) ? kMax : q;
  }
  if (std::fabs(q) < kTiny || std::fabs(a) < kTiny || !std::isfinite(b)) return next_down(q);
  const double r = std::fma(-q, b, a);  // exact: a - q*b
  const bool below = (r != 0.0) && ((r < 0) != (b < 0));
  return below ? next_down(q) : q;
}

inline double div_up(double a, double b) noexcept {
  if (a == 0.0) return 0.0;
  const double q = a / b;
  if (!std::isfinite(q)) {
    return (q == -kInf && std::isfinite(a)) ? -kMax : q;
  }
  if (std::fabs(q) < kTiny || std::fabs(a) < kTiny || !std::isfinite(b)) return next_up(q);
  const double r = std::fma(-q, b, a);
  const bool above = (r != 0.0) && ((r < 0) == (b < 0));
  return above ? next_up(q) : q;
}

inline double sqrt_down(double a) noexcept {
  if (a <= 0.0) return 0.0;
  const double s = std::sqrt(a);
  if (!std::isfinite(s)) return s;
  if (a < kTiny) return next_down(s);
  const double r = std::fma(-s, s, a);
  return r < 0 ? next_down(s) : s;
}

inline double sqrt_up(double a) noexcept {
  if (a <= 0.0) return 0.0;
  const double s = std::sqrt(a);
  if (!std::isfinite(s)) return s;
  if (a < kTiny) return next_up(s);
  const double r = std::fma(-s, s, a);
  return r > 0 ? next_up(s) : s;
}

}  // namespace rounding

class Interval {
 public:
  constexpr Interval() noexcept = default;

  /// Degenerate interval [x, x]. The value is taken as exact.
  explicit Interval(double x) : Interval(x, x) {}

  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
      throw Error(ErrorCode::ArgumentOutOfRange, "invalid interval endpoints");
    }
  }

  /// Smallest interval containing both values, in any order.
  static Interval hull_of(double a, double b) { return a <= b ? Interval(a, b) : Interval(b, a); }

  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }

  [[nodiscard]] bool is_bounded() const noexcept { return std::isfinite(lo_) && std::isfinite(hi_); }
  [[nodiscard]] bool is_point() const noexcept { return lo_ == hi_; }

  /// A representable point inside the interval (not a rigorous quantity).
  [[nodiscard]] double mid() const noexcept;
  /// Upper bound of hi - lo.
  [[nodiscard]] double width() const noexcept { return rounding::sub_up(hi_, lo_); }
  /// Upper bound of max |x| over the interval.
  [[nodiscard]] double mag() const noexcept { return std::fmax(std::fabs(lo_), std::fabs(hi_)); }
  /// Lower bound of min |x| over the interval.
  [[nodiscard]] double mig() const noexcept {
    if (lo_ > 0) return lo_;
    if (hi_ < 0) return -hi_;
    return 0.0;
  }

  [[nodiscard]] bool contains(double x) const noexcept { return lo_ <= x && x <= hi_; }
  [[nodiscard]] bool contains(const Interval& o) const noexcept { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  [[nodiscard]] bool contains_zero() const noexcept { return lo_ <= 0.0 && 0.0 <= hi_; }
  [[nodiscard]] bool overlaps(const Interval& o) const noexcept { return lo_ <= o.hi_ && o.lo_ <= hi_; }

  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);
  Interval& operator/=(const Interval& o);

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

inline Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }

inline Interval operator+(const Interval& a, const Interval& b) {
  return Interval(rounding::add_down(a.lo(), b.lo()), rounding::add_up(a.hi(), b.hi()));
}

inline Interval operator-(const Interval& a, const Interval& b) {
  return Interval(rounding::sub_down(a.lo(), b.hi()), rounding::sub_up(a.hi(), b.lo()));
}

Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);

inline Interval operator+(const Interval& a, double b) { return a + Interval(b); }
inline Interval operator+(double a, const Interval& b) { return Interval(a) + b; }
inline Interval operator-(const Interval& a, double b) { return a - Interval(b); }
inline Interval operator-(double a, const Interval& b) { return Interval(a) - b; }
inline Interval operator*(const Interval& a, double b) { return a * Interval(b); }
inline Interval operator*(double a, const Interval& b) { return Interval(a) * b; }
inline Interval operator/(const Interval& a, double b) { return a / Interval(b); }
inline Interval operator/(double a, const Interval& b) { return Interval(a) / b; }

inline Interval& Interval::operator+=(const Interval& o) { return *this = *this + o; }
inline Interval& Interval::operator-=(const Interval& o) { return *this = *this - o; }
inline Interval& Interval::operator*=(const Interval& o) { return *this = *this * o; }
inline Interval& Interval::operator/=(const Interval& o) { return *this = *this / o; }

Interval sqr(const Interval& x);
Interval sqrt(const Interval& x);
Interval pow(const Interval& x, int n);
Interval abs(const Interval& x);
Interval min(const Interval& a, const Interval& b);
Interval max(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);
/// Intersection; throws ArgumentOutOfRange when disjoint.
Interval intersect(const Interval& a, const Interval& b);

// Elementary functions. Endpoints come from MPFR's correctly rounded
// directed evaluations at 53-bit precision.
Interval exp(const Interval& x);
Interval log(const Interval& x);
/// x^y for x > 0.
Interval pow(const Interval& x, const Interval& y);
Interval pi();

/// Enclosure of Gamma(t) for every t in x. Requires x.lo() > 0.
Interval gamma_enclosure(const Interval& x);

/// Hexadecimal floating-point literal, bit exact (e.g. "0x1.8p-1").
std::string to_hex(double x);
double parse_hex(std::string_view s);
/// "[lo, hi]" with hexadecimal endpoints.
std::string to_hex(const Interval& x);
Interval parse_interval(std::string_view s);

std::ostream& operator<<(std::ostream& os, const Interval& x);

}  // namespace poscert
