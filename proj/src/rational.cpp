#include "renewal/rational.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace renewal {

Integer factorial(unsigned n) {
  Integer result = 1;
  for (unsigned i = 2; i <= n; ++i) result *= i;
  return result;
}

Integer binomial(unsigned n, unsigned r) {
  if (r > n) return 0;
  if (r > n - r) r = n - r;
  Integer result = 1;
  for (unsigned i = 0; i < r; ++i) {
    result *= n - i;
    result /= i + 1;  // exact: prefix products of C(n, i+1)
  }
  return result;
}

Integer falling_factorial(const Integer& k, unsigned m) {
  Integer result = 1;
  for (unsigned i = 0; i < m; ++i) result *= k - i;
  return result;
}

Rational rational_pow(const Rational& base, unsigned exp) {
  Rational result = 1;
  Rational b = base;
  unsigned e = exp;
  while (e > 0) {
    if (e & 1u) result *= b;
    b *= b;
    e >>= 1u;
  }
  return result;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string decimal_string(const Rational& value) {
  const double x = to_double(value);
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("decimal_string: to_chars failed");
  return std::string(buf, end);
}

std::string to_string(const Integer& value) { return value.str(); }

}  // namespace renewal
