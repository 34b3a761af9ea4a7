#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "renewal/distributions.hpp"
#include "renewal/matching.hpp"
#include "renewal/moments.hpp"

using namespace renewal;

namespace {

ProcessSpec exp_spec(double rate = 1.0) {
  ProcessSpec spec;
  spec.family = Family::kExponential;
  spec.rate = rate;
  return spec;
}

double brute_force_min_cost(const std::vector<double>& black,
                            const std::vector<double>& white, double b,
                            std::vector<int>* best_perm = nullptr) {
  std::vector<int> perm(black.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0;
    for (std::size_t i = 0; i < black.size(); ++i)
      cost += abs_pow(black[i] - white[static_cast<size_t>(perm[i])], b);
    if (cost < best) {
      best = cost;
      if (best_perm) *best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("matching cost spot values") {
  const MatchingInstance coincident{{1, 2, 3}, {1, 2, 3}, {0, 1, 2}};
  CHECK(matching_cost(coincident, 1.7).pathwise_cost == 0.0);

  const MatchingInstance identity{{1, 2}, {1.5, 3}, {0, 1}};
  CHECK(matching_cost(identity, 2.0).pathwise_cost == doctest::Approx(1.25));

  const MatchingInstance swapped{{1, 2}, {1.5, 3}, {1, 0}};
  CHECK(matching_cost(swapped, 2.0).pathwise_cost == doctest::Approx(4.25));
}

TEST_CASE("matching cost validates its instance") {
  CHECK_THROWS_AS(matching_cost({{1, 2}, {1, 2}, {0, 0}}, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(matching_cost({{2, 1}, {1, 2}, {0, 1}}, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(matching_cost({{1, 2}, {1, 2, 3}, {0, 1}}, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(matching_cost({{1, 2}, {1, 2}, {0, 1}}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("solver equals identity on sorted instances with convex cost") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> gap(0.01, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<double> black(static_cast<size_t>(n));
    std::vector<double> white(static_cast<size_t>(n));
    double x = 0;
    double y = 0;
    for (int i = 0; i < n; ++i) {
      x += gap(rng);
      y += gap(rng);
      black[static_cast<size_t>(i)] = x;
      white[static_cast<size_t>(i)] = y;
    }
    for (double b : {1.0, 2.0, 3.5}) {
      const AssignmentResult solved = optimal_assignment(black, white, b);
      double identity_cost = 0;
      for (int i = 0; i < n; ++i)
        identity_cost += abs_pow(black[static_cast<size_t>(i)] -
                                     white[static_cast<size_t>(i)],
                                 b);
      CHECK(solved.cost == doctest::Approx(identity_cost).epsilon(1e-12));
      CHECK(solved.cost <= brute_force_min_cost(black, white, b) * (1 + 1e-12));
    }
  }
}

TEST_CASE("solver matches brute force for concave cost") {
  std::mt19937_64 rng(3141);
  std::uniform_real_distribution<double> pos(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    std::vector<double> black(static_cast<size_t>(n));
    std::vector<double> white(static_cast<size_t>(n));
    for (auto* v : {&black, &white}) {
      for (double& p : *v) p = pos(rng);
      std::sort(v->begin(), v->end());
    }
    const AssignmentResult solved = optimal_assignment(black, white, 0.5);
    const double best = brute_force_min_cost(black, white, 0.5);
    CHECK(solved.cost == doctest::Approx(best).epsilon(1e-10));
    // identity is not pathwise optimal in general for concave costs, but the
    // solver can never do worse than it
    double identity_cost = 0;
    for (int i = 0; i < n; ++i)
      identity_cost += abs_pow(
          black[static_cast<size_t>(i)] - white[static_cast<size_t>(i)], 0.5);
    CHECK(solved.cost <= identity_cost * (1 + 1e-12));
  }
}

TEST_CASE("concave cost can favour a crossing matching") {
  const std::vector<double> black{0.0, 1.0};
  const std::vector<double> white{0.9, 1.0};
  const AssignmentResult solved = optimal_assignment(black, white, 0.5);
  const double best = brute_force_min_cost(black, white, 0.5);
  CHECK(solved.cost == doctest::Approx(best).epsilon(1e-12));
  double identity_cost = abs_pow(0.0 - 0.9, 0.5) + abs_pow(1.0 - 1.0, 0.5);
  CHECK(solved.cost <= identity_cost);
}

TEST_CASE("single sensor has a single matching") {
  const AssignmentResult solved =
      optimal_assignment(std::vector<double>{2.5}, std::vector<double>{4.0}, 2.0);
  CHECK(solved.permutation == std::vector<int>{0});
  CHECK(solved.cost == doctest::Approx(2.25));
}

TEST_CASE("solver rejects mismatched lengths") {
  CHECK_THROWS_AS(optimal_assignment(std::vector<double>{1.0, 2.0},
                                     std::vector<double>{1.0}, 2.0),
                  std::invalid_argument);
}

TEST_CASE("cost ties resolve to the lexicographically smallest permutation") {
  // b = 1 with both black sensors left of both white ones: identity and swap
  // cost the same; the identity (smaller lexicographically) must be reported.
  const std::vector<double> black{0.0, 1.0};
  const std::vector<double> white{2.0, 3.0};
  const AssignmentResult solved = optimal_assignment(black, white, 1.0);
  CHECK(solved.cost == doctest::Approx(4.0));
  CHECK(solved.permutation == std::vector<int>{0, 1});

  // Same structure at n = 3.
  const std::vector<double> black3{0.0, 0.5, 1.0};
  const std::vector<double> white3{5.0, 6.0, 7.0};
  const AssignmentResult solved3 = optimal_assignment(black3, white3, 1.0);
  CHECK(solved3.permutation == std::vector<int>{0, 1, 2});
}

TEST_CASE("tie-break matches the lexicographic minimum over all optima") {
  // b = 1 over small-integer positions produces plenty of exact cost ties.
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    auto draw_positions = [&] {
      std::vector<double> positions;
      int x = 0;
      for (int i = 0; i < n; ++i) {
        x += 1 + static_cast<int>(rng() % 3);
        positions.push_back(static_cast<double>(x));
      }
      return positions;
    };
    const std::vector<double> black = draw_positions();
    const std::vector<double> white = draw_positions();

    const AssignmentResult solved = optimal_assignment(black, white, 1.0);

    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_lex;
    do {
      double cost = 0;
      for (int i = 0; i < n; ++i)
        cost += std::fabs(black[static_cast<size_t>(i)] -
                          white[static_cast<size_t>(perm[static_cast<size_t>(i)])]);
      if (cost < best - 1e-12) {
        best = cost;
        best_lex = perm;
      }
      // next_permutation enumerates lexicographically, so the first optimum
      // seen at each cost level is already the lexicographic minimum
    } while (std::next_permutation(perm.begin(), perm.end()));

    CHECK(solved.cost == doctest::Approx(best).epsilon(1e-12));
    CHECK(solved.permutation == best_lex);
  }
}

TEST_CASE("T_b estimate matches the exact engine summation at b = 2, n = 10") {
  const MomentEstimate est =
      estimate_T_b(10, 2.0, exp_spec(), 30000, SeedSpec{600, 0});
  // Independent route: sum over k of the exact per-k values = n(n+1) = 110.
  const MomentProfile profile =
      analytic_profile(ProcessSpec{Family::kExponential, 1.0, 0.5, 1.0, 4});
  Rational exact = 0;
  for (long k = 1; k <= 10; ++k) exact += exact_pair_moment(2, k, profile).value;
  CHECK(exact == 110);
  CHECK(std::fabs(est.mean - 110.0) <= 4.0 * est.std_error);
}

TEST_CASE("T_b estimate matches the exact engine summation at b = 4, n = 20") {
  const MomentEstimate est =
      estimate_T_b(20, 4.0, exp_spec(), 30000, SeedSpec{610, 0});
  const MomentProfile profile =
      analytic_profile(ProcessSpec{Family::kExponential, 1.0, 0.5, 1.0, 4});
  Rational exact = 0;
  for (long k = 1; k <= 20; ++k) exact += exact_pair_moment(4, k, profile).value;
  CHECK(exact == 36960);
  CHECK(std::fabs(est.mean - 36960.0) <= 4.0 * est.std_error);
}

TEST_CASE("solver never does worse than random permutations at larger n") {
  const ProcessSpec spec = exp_spec();
  std::mt19937_64 rng(4242);
  for (long instance = 0; instance < 10; ++instance) {
    const auto index = static_cast<std::uint64_t>(instance);
    const auto black =
        arrival_prefix_sums(spec, 40, substream(SeedSpec{611, 0}, 2 * index));
    const auto white =
        arrival_prefix_sums(spec, 40, substream(SeedSpec{611, 0}, 2 * index + 1));
    for (double b : {0.5, 1.0, 2.0}) {
      const AssignmentResult solved = optimal_assignment(black, white, b);
      std::vector<int> perm(black.size());
      std::iota(perm.begin(), perm.end(), 0);
      for (int shuffle = 0; shuffle < 5; ++shuffle) {
        std::shuffle(perm.begin(), perm.end(), rng);
        const double cost =
            matching_cost({black, white, perm}, b).pathwise_cost;
        CHECK(solved.cost <= cost * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("T_b at rate 5 is exactly 1/25 of rate 1 under the same seed") {
  const SeedSpec seed{601, 0};
  const MomentEstimate unit = estimate_T_b(10, 2.0, exp_spec(1.0), 2000, seed);
  const MomentEstimate scaled = estimate_T_b(10, 2.0, exp_spec(5.0), 2000, seed);
  CHECK(scaled.mean == std::pow(5.0, -2.0) * unit.mean);
  CHECK(scaled.std_error == std::pow(5.0, -2.0) * unit.std_error);
}

TEST_CASE("T_b additivity across k under common random numbers") {
  const long n = 12;
  const SeedSpec seed{602, 0};
  const MomentEstimate total = estimate_T_b(n, 3.0, exp_spec(), 5000, seed);
  std::vector<long> k_grid(static_cast<size_t>(n));
  std::iota(k_grid.begin(), k_grid.end(), 1);
  const auto per_k = moment_sweep(exp_spec(), k_grid, nullptr, {3.0}, 5000, seed);
  double sum = 0;
  for (const MomentEstimate& e : per_k[0]) sum += e.mean;
  CHECK(total.mean == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("T_b scaling slope near 1.5 for b = 1 and bounded above") {
  const SlopeFit fit = fit_T_b_scaling(1.0, {10, 30, 100, 300}, exp_spec(),
                                       20000, SeedSpec{603, 0});
  CHECK(fit.slope <= 1.55);
  CHECK(fit.slope == doctest::Approx(1.5).epsilon(0.05));
}

TEST_CASE("permutation table puts identity first and minimal") {
  const auto table =
      permutation_cost_table(3, 1.0, exp_spec(), 20000, SeedSpec{604, 0});
  REQUIRE(table.size() == 6);
  CHECK(table[0].permutation == std::vector<int>{0, 1, 2});
  CHECK(table[0].margin == 0.0);
  CHECK(table[0].margin_std_error == 0.0);
  for (std::size_t p = 1; p < table.size(); ++p) {
    CHECK(table[p].margin > 0.0);
    CHECK(table[p].margin > 4.0 * table[p].margin_std_error);
    CHECK(table[p].mean_cost > table[0].mean_cost);
  }
}

TEST_CASE("n = 2 swap margin matches its closed-form gap direction") {
  const auto table =
      permutation_cost_table(2, 2.0, exp_spec(), 30000, SeedSpec{605, 0});
  REQUIRE(table.size() == 2);
  // identity mean: E(X1-Y1)^2 + E(X2-Y2)^2 = 2 + 4 = 6
  CHECK(std::fabs(table[0].mean_cost - 6.0) <= 4.0 * table[0].std_error);
  CHECK(table[1].margin > 4.0 * table[1].margin_std_error);
}

TEST_CASE("single sensor table is trivially minimal") {
  const auto table =
      permutation_cost_table(1, 2.0, exp_spec(), 1000, SeedSpec{606, 0});
  REQUIRE(table.size() == 1);
  CHECK(table[0].margin == 0.0);
}

TEST_CASE("permutation table rejects oversized n") {
  CHECK_THROWS_AS(
      permutation_cost_table(7, 2.0, exp_spec(), 1000, SeedSpec{607, 0}),
      std::invalid_argument);
}

TEST_CASE("solver is an independent oracle on sampled arrival instances") {
  // Sorted arrivals, convex cost: solver must reproduce the identity cost to
  // float round-off on every sampled instance.
  const ProcessSpec spec = exp_spec();
  for (long instance = 0; instance < 50; ++instance) {
    const auto index = static_cast<std::uint64_t>(instance);
    const auto black =
        arrival_prefix_sums(spec, 50, substream(SeedSpec{608, 0}, 2 * index));
    const auto white =
        arrival_prefix_sums(spec, 50, substream(SeedSpec{608, 0}, 2 * index + 1));
    const AssignmentResult solved = optimal_assignment(black, white, 2.0);
    double identity_cost = 0;
    for (std::size_t i = 0; i < black.size(); ++i)
      identity_cost += (black[i] - white[i]) * (black[i] - white[i]);
    CHECK(std::fabs(solved.cost - identity_cost) <= 1e-12 * identity_cost);
  }
}
