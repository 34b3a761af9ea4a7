#include "renewal/moments.hpp"

#include <algorithm>
#include <map>

namespace renewal {

namespace {

std::string order_message(int required, int stored) {
  return "moment of order " + std::to_string(required) +
         " required, but the profile stores moments only up to order " +
         std::to_string(stored);
}

void require_even_exponent(int a, bool allow_large_a) {
  if (a < 2 || a % 2 != 0)
    throw std::invalid_argument("exponent a must be a positive even integer, got " +
                                std::to_string(a));
  if (!allow_large_a && a > kDefaultMaxExponent)
    throw std::invalid_argument(
        "exponent a = " + std::to_string(a) + " exceeds the default cap " +
        std::to_string(kDefaultMaxExponent) + "; pass allow_large_a to override");
}

}  // namespace

OrderInsufficientError::OrderInsufficientError(int required, int stored)
    : std::runtime_error(order_message(required, stored)),
      required_(required),
      stored_(stored) {}

MomentProfile::MomentProfile(std::vector<Rational> moments, bool exact,
                             std::string label)
    : moments_(std::move(moments)), exact_(exact), label_(std::move(label)) {
  const int c = static_cast<int>(moments_.size()) - 1;
  if (c < 2 || c % 2 != 0)
    throw std::invalid_argument("moment profile order must be even and >= 2");
  if (moments_[0] != 1 || moments_[1] != 1)
    throw std::invalid_argument("moment profile requires m_0 = 1 and m_1 = 1");
  for (int p = 2; p <= c; ++p) {
    if (moments_[static_cast<size_t>(p)] <= 1)
      throw std::invalid_argument("moment profile requires m_p > 1 for p = " +
                                  std::to_string(p) +
                                  " (mean-1 positive increments)");
  }
}

const Rational& MomentProfile::moment(int p) const {
  if (p < 0) throw std::invalid_argument("moment order must be non-negative");
  if (p > order()) throw OrderInsufficientError(p, order());
  return moments_[static_cast<size_t>(p)];
}

bool MomentProfile::ill_conditioned() const {
  return variance() < Rational(1, 1000000000);
}

Rational MomentProfile::moment_bound(int a) const {
  if (a > order()) throw OrderInsufficientError(a, order());
  Rational bound = moments_[0];
  for (int p = 1; p <= a; ++p)
    bound = std::max(bound, moments_[static_cast<size_t>(p)]);
  return bound;
}

Rational central_diff_moment(int d, const MomentProfile& profile) {
  if (d < 0) throw std::invalid_argument("central difference order must be >= 0");
  if (d > profile.order()) throw OrderInsufficientError(d, profile.order());
  Rational sum = 0;
  for (int j = 0; j <= d; ++j) {
    Rational term = Rational(binomial(static_cast<unsigned>(d),
                                      static_cast<unsigned>(j))) *
                    profile.moment(j) * profile.moment(d - j);
    if ((d - j) % 2 != 0) term = -term;
    sum += term;
  }
  return sum;
}

std::vector<PartitionTerm> enumerate_partition_terms(int a, long k,
                                                     bool allow_large_a) {
  require_even_exponent(a, allow_large_a);
  if (k < 1) throw std::invalid_argument("k must be a positive integer");

  const int half = a / 2;
  const int max_parts = static_cast<int>(std::min<long>(k, half));
  const Integer a_factorial = factorial(static_cast<unsigned>(a));

  std::vector<PartitionTerm> terms;
  std::vector<int> parts;

  // Descending-part recursion over integer partitions of a/2.
  auto emit = [&]() {
    PartitionTerm term;
    term.parts = parts;

    // Compositions realizing this multiset: choose ordered distinct slots,
    // then quotient by permutations of equal parts.
    Integer slot_arrangements =
        falling_factorial(Integer(k), static_cast<unsigned>(parts.size()));
    std::map<int, unsigned> repeats;
    for (int d : parts) ++repeats[d];
    for (const auto& [part, count] : repeats) {
      (void)part;
      slot_arrangements /= factorial(count);
    }
    term.multiplicity = slot_arrangements;

    Integer denom = 1;
    for (int d : parts) denom *= factorial(static_cast<unsigned>(2 * d));
    term.coefficient = Rational(a_factorial, denom);

    terms.push_back(std::move(term));
  };

  auto recurse = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      emit();
      return;
    }
    if (static_cast<int>(parts.size()) >= max_parts) return;
    for (int d = std::min(remaining, max_part); d >= 1; --d) {
      parts.push_back(d);
      self(self, remaining - d, d);
      parts.pop_back();
    }
  };
  recurse(recurse, half, half);
  return terms;
}

ExactMomentResult exact_pair_moment(int a, long k, const MomentProfile& profile,
                                    bool allow_large_a) {
  require_even_exponent(a, allow_large_a);
  if (k < 1) throw std::invalid_argument("k must be a positive integer");
  if (a > profile.order()) throw OrderInsufficientError(a, profile.order());

  ExactMomentResult result;
  result.a = a;
  result.k = k;

  Rational value = 0;
  for (const PartitionTerm& term : enumerate_partition_terms(a, k, allow_large_a)) {
    Rational factor = 1;
    for (int d : term.parts) factor *= central_diff_moment(2 * d, profile);
    value += term.coefficient * Rational(term.multiplicity) * factor;
  }
  result.value = value;

  const int half = a / 2;
  result.leading_term = Rational(factorial(static_cast<unsigned>(a)),
                                 factorial(static_cast<unsigned>(half))) *
                        rational_pow(profile.variance(), static_cast<unsigned>(half)) *
                        Rational(rational_pow(Rational(k), static_cast<unsigned>(half)));
  result.remainder = result.value - result.leading_term;
  return result;
}

ExactMomentResult::AtRate ExactMomentResult::at_rate(double lambda) const {
  if (!(lambda > 0)) throw std::invalid_argument("rate lambda must be positive");
  // lambda is a double, hence an exact rational; the division stays exact.
  const Rational scale = rational_pow(Rational(lambda), static_cast<unsigned>(a));
  return AtRate{to_double(value / scale), to_double(leading_term / scale),
                to_double(remainder / scale)};
}

std::vector<std::pair<long, double>> remainder_ratio_scan(
    int a, const std::vector<long>& k_grid, const MomentProfile& profile,
    bool allow_large_a) {
  require_even_exponent(a, allow_large_a);
  long previous = 0;
  for (long k : k_grid) {
    if (k <= previous)
      throw std::invalid_argument("k grid must be strictly increasing");
    if (2 * k <= a)
      throw std::invalid_argument("remainder scan requires k > a/2, got k = " +
                                  std::to_string(k));
    previous = k;
  }

  std::vector<std::pair<long, double>> ratios;
  ratios.reserve(k_grid.size());
  for (long k : k_grid) {
    const ExactMomentResult result = exact_pair_moment(a, k, profile, allow_large_a);
    Rational ratio = result.remainder /
                     Rational(rational_pow(Rational(k),
                                           static_cast<unsigned>(a / 2 - 1)));
    if (ratio < 0) ratio = -ratio;
    ratios.emplace_back(k, to_double(ratio));
  }
  return ratios;
}

}  // namespace renewal
