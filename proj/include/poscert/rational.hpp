#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "poscert/interval.hpp"

namespace poscert {

/// Exact rationals; always canonical (reduced, positive denominator).
using Rational = mpq_class;
using BigInt = mpz_class;

/// Parses "7", "-5/512", "0.009765625" or "1e-2" exactly.
Rational parse_rational(std::string_view s);

/// Tightest binary64 interval containing the value.
Interval to_interval(const Rational& q);
Interval to_interval(const BigInt& z);
/// Enclosure of num/den for den != 0, valid for numerators and
/// denominators far beyond the binary64 range.
Interval ratio_to_interval(const BigInt& num, const BigInt& den);

/// Exact conversion of a finite double.
Rational to_rational(double x);

std::string to_string(const Rational& q);

}  // namespace poscert
