#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace renewal {

// Exact arithmetic backing the moment engine. Factorials up to a! and the
// binomials C(k, a/2) overflow 64-bit integers long before desk-scale k, so
// everything combinatorial runs on arbitrary-precision integers/rationals and
// only the presentation layer converts to double.
using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

Integer factorial(unsigned n);
Integer binomial(unsigned n, unsigned r);

// k * (k-1) * ... * (k-m+1), exact; m = 0 yields 1.
Integer falling_factorial(const Integer& k, unsigned m);

Rational rational_pow(const Rational& base, unsigned exp);

double to_double(const Rational& value);

// Shortest decimal string that round-trips through double.
std::string decimal_string(const Rational& value);

std::string to_string(const Integer& value);

}  // namespace renewal
