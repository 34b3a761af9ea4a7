#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "renewal/distributions.hpp"
#include "renewal/moments.hpp"
#include "support/oracles.hpp"

using namespace renewal;

namespace {

ProcessSpec family_spec(Family family, int max_order = 8) {
  ProcessSpec spec;
  spec.family = family;
  spec.max_order = max_order;
  return spec;
}

MomentProfile exp_profile(int order = 8) {
  return analytic_profile(family_spec(Family::kExponential, order));
}

MomentProfile uniform_profile(int order = 8) {
  return analytic_profile(family_spec(Family::kUniformOnZeroTwo, order));
}

}  // namespace

TEST_CASE("central difference moments vanish for every odd order") {
  const auto profiles = {exp_profile(), uniform_profile()};
  for (const MomentProfile& profile : profiles)
    for (int d = 1; d <= profile.order(); d += 2)
      CHECK(central_diff_moment(d, profile) == 0);
}

TEST_CASE("central difference moment at d = 2 is twice the variance") {
  CHECK(central_diff_moment(2, exp_profile()) == 2);
  CHECK(central_diff_moment(2, uniform_profile()) == Rational(2, 3));
}

TEST_CASE("central difference moment at d = 4, exponential") {
  const Rational value = central_diff_moment(4, exp_profile());
  CHECK(value == 24);

  // Independent route: xi - tau for unit exponentials is standard Laplace.
  const double quartic = oracle::integrate(
      [](double x) { return std::pow(x, 4) * 0.5 * std::exp(-std::fabs(x)); },
      -60.0, 60.0);
  CHECK(to_double(value) == doctest::Approx(quartic).epsilon(1e-8));
}

TEST_CASE("central difference moment rejects orders beyond the profile") {
  const MomentProfile profile = exp_profile(4);
  CHECK_THROWS_WITH_AS(central_diff_moment(6, profile),
                       "moment of order 6 required, but the profile stores "
                       "moments only up to order 4",
                       OrderInsufficientError);
  try {
    central_diff_moment(6, profile);
  } catch (const OrderInsufficientError& e) {
    CHECK(e.required_order() == 6);
    CHECK(e.stored_order() == 4);
  }
}

TEST_CASE("partition terms for a = 4, k = 2") {
  const auto terms = enumerate_partition_terms(4, 2);
  REQUIRE(terms.size() == 2);
  // Descending-first enumeration: {2} before {1,1}.
  CHECK(terms[0].parts == std::vector<int>{2});
  CHECK(terms[0].multiplicity == 2);
  CHECK(terms[0].coefficient == 1);
  CHECK(terms[1].parts == std::vector<int>{1, 1});
  CHECK(terms[1].multiplicity == 1);
  CHECK(terms[1].coefficient == 6);
}

TEST_CASE("partition terms for a = 2, k = 5") {
  const auto terms = enumerate_partition_terms(2, 5);
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].parts == std::vector<int>{1});
  CHECK(terms[0].multiplicity == 5);
  CHECK(terms[0].coefficient == 1);
}

TEST_CASE("partition terms for a = 6, k = 10") {
  const auto terms = enumerate_partition_terms(6, 10);
  REQUIRE(terms.size() == 3);
  CHECK(terms[0].parts == std::vector<int>{3});
  CHECK(terms[0].multiplicity == 10);
  CHECK(terms[1].parts == std::vector<int>{2, 1});
  CHECK(terms[1].multiplicity == 90);
  CHECK(terms[2].parts == std::vector<int>{1, 1, 1});
  CHECK(terms[2].multiplicity == 120);
}

TEST_CASE("multiplicities sum to the even-composition count") {
  for (int a : {2, 4, 6, 8}) {
    for (int k = 1; k <= 8; ++k) {
      Integer total = 0;
      for (const PartitionTerm& term : enumerate_partition_terms(a, k))
        total += term.multiplicity;
      CHECK(total == oracle::even_composition_count(a, k));
    }
  }
}

TEST_CASE("all-ones partition term reproduces the choose(k, a/2) block") {
  for (int a : {4, 6, 8}) {
    for (long k : {4L, 7L, 20L}) {
      if (k < a / 2) continue;
      const auto terms = enumerate_partition_terms(a, k);
      const PartitionTerm& ones = terms.back();
      CHECK(static_cast<int>(ones.parts.size()) == a / 2);
      CHECK(ones.multiplicity == binomial(static_cast<unsigned>(k),
                                          static_cast<unsigned>(a / 2)));
      // coefficient * (2 Var)^{a/2} * C(k, a/2) == a! Var^{a/2} C(k, a/2)
      CHECK(ones.coefficient ==
            Rational(factorial(static_cast<unsigned>(a))) /
                rational_pow(Rational(2), static_cast<unsigned>(a / 2)));
    }
  }
}

TEST_CASE("exact pair moment matches brute-force composition enumeration") {
  const auto profiles = {exp_profile(), uniform_profile()};
  for (const MomentProfile& profile : profiles) {
    for (int a : {2, 4, 6, 8}) {
      for (int k = 1; k <= 8; ++k) {
        const Rational engine = exact_pair_moment(a, k, profile).value;
        CHECK(engine == oracle::composition_moment(a, k, profile, true));
        if (k <= 4)
          CHECK(engine == oracle::composition_moment(a, k, profile, false));
      }
    }
  }
}

TEST_CASE("exact pair moment, exponential spot values") {
  const MomentProfile profile = exp_profile();
  CHECK(exact_pair_moment(2, 5, profile).value == 10);
  CHECK(exact_pair_moment(4, 2, profile).value == 72);

  const ExactMomentResult at_100 = exact_pair_moment(4, 100, profile);
  CHECK(at_100.value == 121200);
  CHECK(at_100.leading_term == 120000);
  CHECK(at_100.remainder == 1200);
}

TEST_CASE("exponential quartic follows the 12k^2 + 12k closed form") {
  const MomentProfile profile = exp_profile(4);
  for (long k : {1L, 2L, 17L, 99L, 1000L}) {
    const ExactMomentResult result = exact_pair_moment(4, k, profile);
    CHECK(result.value == Rational(12) * k * k + Rational(12) * k);
    CHECK(result.leading_term == Rational(12) * k * k);
  }
}

TEST_CASE("exact value is strictly increasing in k") {
  const auto profiles = {exp_profile(), uniform_profile()};
  for (const MomentProfile& profile : profiles) {
    for (int a : {2, 4, 6}) {
      Rational previous = 0;
      for (long k = 1; k <= 12; ++k) {
        const Rational value = exact_pair_moment(a, k, profile).value;
        CHECK(value > previous);
        previous = value;
      }
    }
  }
}

TEST_CASE("rate enters as an exact final division") {
  const ExactMomentResult result = exact_pair_moment(4, 100, exp_profile());
  const auto at1 = result.at_rate(1.0);
  const auto at2 = result.at_rate(2.0);
  CHECK(at2.value == at1.value / 16.0);
  CHECK(at2.leading_term == at1.leading_term / 16.0);
  CHECK(at2.remainder == at1.remainder / 16.0);

  // Ordering over k is invariant under the rate
  const auto small = exact_pair_moment(4, 10, exp_profile());
  CHECK(small.at_rate(7.5).value < result.at_rate(7.5).value);
}

TEST_CASE("remainder ratio scan is constant for the exponential quartic") {
  const auto ratios = remainder_ratio_scan(4, {10, 100, 1000}, exp_profile(4));
  REQUIRE(ratios.size() == 3);
  for (const auto& [k, ratio] : ratios) CHECK(ratio == 12.0);
}

TEST_CASE("remainder ratio is identically zero for a = 2") {
  const auto ratios = remainder_ratio_scan(2, {2, 30, 400}, uniform_profile(2));
  for (const auto& [k, ratio] : ratios) CHECK(ratio == 0.0);
}

TEST_CASE("remainder ratio stays bounded and settles for a = 6, uniform") {
  const auto ratios = remainder_ratio_scan(6, {10, 50, 250}, uniform_profile(6));
  REQUIRE(ratios.size() == 3);
  const double fitted = 2.0 * ratios[0].second;
  CHECK(ratios[1].second <= fitted);
  CHECK(ratios[2].second <= fitted);
  CHECK(std::fabs(ratios[2].second - ratios[1].second) <
        std::fabs(ratios[1].second - ratios[0].second));
}

TEST_CASE("remainder ratio scan enforces its grid preconditions") {
  const MomentProfile profile = exp_profile(4);
  CHECK_THROWS_AS(remainder_ratio_scan(4, {10, 10, 20}, profile),
                  std::invalid_argument);
  CHECK_THROWS_AS(remainder_ratio_scan(4, {1, 10, 20}, profile),
                  std::invalid_argument);  // needs k > a/2
  CHECK_NOTHROW(exact_pair_moment(4, 1, profile));  // identity itself is fine
}

TEST_CASE("exponent validation and the large-a opt-in") {
  const MomentProfile profile = exp_profile();
  CHECK_THROWS_AS(exact_pair_moment(3, 5, profile), std::invalid_argument);
  CHECK_THROWS_AS(exact_pair_moment(0, 5, profile), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_partition_terms(18, 5), std::invalid_argument);
  CHECK_NOTHROW(enumerate_partition_terms(18, 5, true));
  CHECK_THROWS_AS(exact_pair_moment(10, 5, exp_profile(8)),
                  OrderInsufficientError);
}

TEST_CASE("profile invariants are enforced") {
  // m_1 != 1
  CHECK_THROWS_AS(MomentProfile({1, Rational(2), Rational(5)}, true, "bad"),
                  std::invalid_argument);
  // m_2 <= 1 (degenerate variance)
  CHECK_THROWS_AS(MomentProfile({1, 1, 1}, true, "degenerate"),
                  std::invalid_argument);
  // odd order
  CHECK_THROWS_AS(MomentProfile({1, 1, Rational(2), Rational(7)}, true, "odd"),
                  std::invalid_argument);

  const MomentProfile fine({1, 1, Rational(2)}, true, "ok");
  CHECK(fine.variance() == 1);
  CHECK_FALSE(fine.ill_conditioned());

  const MomentProfile nearly(
      {1, 1, 1 + Rational(Integer(1), Integer(10000000000LL))}, true,
      "nearly-degenerate");
  CHECK(nearly.ill_conditioned());
}
