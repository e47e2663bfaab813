#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace tflat {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p/q", integers and finite decimals ("-0.25", "1.5e-3") exactly.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

/// Best rational approximation with denominator <= max_den (continued fractions).
/// Returns nullopt unless |x - p/q| <= tol.
std::optional<Rational> rationalize(double x, long max_den, double tol);

/// Exact positive integer n with n*n == v, if any.
std::optional<Integer> exact_sqrt(const Integer& v);

}  // namespace tflat
