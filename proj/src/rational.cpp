#include "poscert/rational.hpp"

#include <cctype>
#include <cmath>

namespace poscert {

using namespace rounding;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view s) {
  throw Error(ErrorCode::ParseError, "not a rational number: '" + std::string(s) + "'");
}

Rational parse_decimal(std::string_view s) {
  bool neg = false;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  std::string digits;
  long scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) bad(s);
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') bad(s);
    ++i;
    const std::string expo(s.substr(i));
    if (expo.empty()) bad(s);
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(expo, &used);
    } catch (const std::exception&) {
      bad(s);
    }
    if (used != expo.size() || std::labs(e) > 100000) bad(s);
    scale += e;
  }
  BigInt num(digits, 10);
  BigInt pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(scale)));
  Rational q = scale >= 0 ? Rational(num * pow10) : Rational(num, pow10);
  q.canonicalize();
  return neg ? Rational(-q) : q;
}

// Truncated mantissa m in [0.5, 1) with |z| = (m + theta) 2^e, 0 <= theta < ulp(m).
Interval magnitude_mantissa(const BigInt& z, long& e) {
  const double m = std::fabs(mpz_get_d_2exp(&e, z.get_mpz_t()));
  const bool exact = mpz_sizeinbase(z.get_mpz_t(), 2) <= 53;
  return exact ? Interval(m) : Interval(m, next_up(m));
}

double scale_down(double x, long e) {
  if (x == 0.0) return 0.0;
  if (e > 4000) return kMax;
  if (e < -4000) return x > 0 ? 0.0 : -std::numeric_limits<double>::denorm_min();
  const double r = std::ldexp(x, static_cast<int>(e));
  if (std::isinf(r)) return r > 0 ? kMax : r;
  if (std::fabs(r) < 0x1p-1000) return next_down(r);
  return r;
}

double scale_up(double x, long e) {
  if (x == 0.0) return 0.0;
  if (e > 4000) return x > 0 ? kInf : -kMax;
  if (e < -4000) return x > 0 ? std::numeric_limits<double>::denorm_min() : 0.0;
  const double r = std::ldexp(x, static_cast<int>(e));
  if (std::isinf(r)) return r < 0 ? -kMax : r;
  if (std::fabs(r) < 0x1p-1000) return next_up(r);
  return r;
}

}  // namespace

Rational parse_rational(std::string_view s) {
  s = trim(s);
  if (s.empty()) bad(s);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s);
  const Rational num = parse_decimal(trim(s.substr(0, slash)));
  const Rational den = parse_decimal(trim(s.substr(slash + 1)));
  if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(s) + "'");
  Rational q = num / den;
  q.canonicalize();
  return q;
}

Interval ratio_to_interval(const BigInt& num, const BigInt& den) {
  if (den == 0) throw Error(ErrorCode::DivisionByIntervalContainingZero, "zero denominator");
  if (num == 0) return Interval(0.0);
  long en = 0;
  long ed = 0;
  const Interval mn = magnitude_mantissa(num, en);
  const Interval md = magnitude_mantissa(den, ed);
  const Interval q = mn / md;
  const long e = en - ed;
  const bool neg = (sgn(num) < 0) != (sgn(den) < 0);
  const Interval mag(scale_down(q.lo(), e), scale_up(q.hi(), e));
  return neg ? -mag : mag;
}

Interval to_interval(const Rational& q) {
  const double d = q.get_d();
  if (std::isfinite(d) && std::fabs(d) >= 0x1p-1000) {
    const int c = cmp(Rational(d), q);
    if (c == 0) return Interval(d);
    return c < 0 ? Interval(d, next_up(d)) : Interval(next_down(d), d);
  }
  return ratio_to_interval(q.get_num(), q.get_den());
}

Interval to_interval(const BigInt& z) { return ratio_to_interval(z, BigInt(1)); }

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::ArgumentOutOfRange, "non-finite double to rational");
  return Rational(x);
}

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace poscert
