// Test-only oracles, independent of the library's computation paths:
// direct composition enumeration, adaptive Simpson quadrature, and the
// gamma-difference closed form for first absolute moments.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "renewal/moments.hpp"

namespace oracle {

// E[(xi - tau)^l] by direct binomial expansion of the two i.i.d. copies.
inline renewal::Rational diff_moment(int l, const renewal::MomentProfile& profile) {
  renewal::Rational sum = 0;
  for (int j = 0; j <= l; ++j) {
    renewal::Rational term =
        renewal::Rational(renewal::binomial(static_cast<unsigned>(l),
                                            static_cast<unsigned>(j))) *
        profile.moment(j) * profile.moment(l - j);
    if ((l - j) % 2 != 0) term = -term;
    sum += term;
  }
  return sum;
}

// Direct loop over compositions (l_1..l_k) of a; even_only restricts to the
// all-even index set. Feasible for a <= 8, k <= 8.
inline renewal::Rational composition_moment(int a, int k,
                                            const renewal::MomentProfile& profile,
                                            bool even_only) {
  const renewal::Integer a_fact = renewal::factorial(static_cast<unsigned>(a));
  renewal::Rational total = 0;
  std::vector<int> parts(static_cast<size_t>(k), 0);
  std::function<void(int, int)> walk = [&](int slot, int remaining) {
    if (slot == k - 1) {
      if (even_only && remaining % 2 != 0) return;
      parts[static_cast<size_t>(slot)] = remaining;
      renewal::Integer denom = 1;
      renewal::Rational product = 1;
      for (int l : parts) {
        denom *= renewal::factorial(static_cast<unsigned>(l));
        if (l > 0) product *= diff_moment(l, profile);
      }
      total += renewal::Rational(a_fact, denom) * product;
      return;
    }
    for (int l = 0; l <= remaining; l += even_only ? 2 : 1) {
      parts[static_cast<size_t>(slot)] = l;
      walk(slot + 1, remaining - l);
    }
  };
  walk(0, a);
  return total;
}

// Number of all-even compositions of a into k slots.
inline renewal::Integer even_composition_count(int a, int k) {
  renewal::Integer total = 0;
  std::function<void(int, int)> walk = [&](int slot, int remaining) {
    if (slot == k - 1) {
      if (remaining % 2 == 0) ++total;
      return;
    }
    for (int l = 0; l <= remaining; l += 2) walk(slot + 1, remaining - l);
  };
  walk(0, a);
  return total;
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double lo,
                        double hi, double tol = 1e-10, int depth = 24) {
  std::function<double(double, double, double, double, double, double, int)>
      step = [&](double a, double b, double fa, double fm, double fb,
                 double whole, int level) -> double {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (level <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return step(a, m, fa, flm, fm, left, level - 1) +
           step(m, b, fm, frm, fb, right, level - 1);
  };
  const double fa = f(lo);
  const double fb = f(hi);
  const double fm = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return step(lo, hi, fa, fm, fb, whole, depth);
}

// E|X_k - Y_k| for two independent gamma(k, 1) arrivals: 2k C(2k,k) / 4^k.
inline double gamma_abs_diff_mean(int k) {
  const renewal::Rational value =
      renewal::Rational(2 * k) *
      renewal::Rational(renewal::binomial(static_cast<unsigned>(2 * k),
                                          static_cast<unsigned>(k))) /
      renewal::rational_pow(renewal::Rational(4), static_cast<unsigned>(k));
  return renewal::to_double(value);
}

}  // namespace oracle
