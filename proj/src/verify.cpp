#include "renewal/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "renewal/distributions.hpp"
#include "renewal/io.hpp"
#include "renewal/matching.hpp"
#include "renewal/moments.hpp"
#include "renewal/montecarlo.hpp"

namespace renewal {

namespace {

// ---------------------------------------------------------------------------
// Brute-force oracle: direct enumeration of compositions (l_1..l_k) of a,
// independent of the partition-term grouping the engine uses.

Rational pair_diff_moment_direct(int l, const MomentProfile& profile) {
  Rational sum = 0;
  for (int j = 0; j <= l; ++j) {
    Rational term = Rational(binomial(static_cast<unsigned>(l),
                                      static_cast<unsigned>(j))) *
                    profile.moment(j) * profile.moment(l - j);
    if ((l - j) % 2 != 0) term = -term;
    sum += term;
  }
  return sum;
}

Rational composition_sum(int a, int k, const MomentProfile& profile,
                         bool even_only) {
  const Integer a_factorial = factorial(static_cast<unsigned>(a));
  Rational total = 0;
  std::vector<int> parts(static_cast<size_t>(k), 0);
  auto recurse = [&](auto&& self, int slot, int remaining) -> void {
    if (slot == k - 1) {
      if (even_only && remaining % 2 != 0) return;
      parts[static_cast<size_t>(slot)] = remaining;
      Integer denom = 1;
      Rational product = 1;
      for (int l : parts) {
        denom *= factorial(static_cast<unsigned>(l));
        if (l > 0) product *= pair_diff_moment_direct(l, profile);
      }
      total += Rational(a_factorial, denom) * product;
      return;
    }
    const int step = even_only ? 2 : 1;
    for (int l = 0; l <= remaining; l += step) {
      parts[static_cast<size_t>(slot)] = l;
      self(self, slot + 1, remaining - l);
    }
    parts[static_cast<size_t>(slot)] = 0;
  };
  recurse(recurse, 0, a);
  return total;
}

// ---------------------------------------------------------------------------

using Details = std::vector<std::pair<std::string, std::string>>;

CheckResult make_result(std::string name, std::string band, bool pass,
                        Details details) {
  return CheckResult{std::move(name), std::move(band), pass ? "pass" : "fail",
                     std::move(details)};
}

CheckResult make_skipped(std::string name, std::string band, long needed,
                         long given) {
  Details details;
  details.emplace_back("reason", "under-powered: needs >= " +
                                     std::to_string(needed) +
                                     " replications, got " + std::to_string(given));
  return CheckResult{std::move(name), std::move(band), "skipped",
                     std::move(details)};
}

ProcessSpec exponential_spec(int max_order = kDefaultMaxExponent) {
  ProcessSpec spec;
  spec.family = Family::kExponential;
  spec.max_order = max_order;
  return spec;
}

ProcessSpec uniform_spec(int max_order = kDefaultMaxExponent) {
  ProcessSpec spec;
  spec.family = Family::kUniformOnZeroTwo;
  spec.max_order = max_order;
  return spec;
}

CheckResult check_exact_vs_bruteforce() {
  Details details;
  bool pass = true;
  int cases = 0;
  for (const ProcessSpec& spec : {exponential_spec(8), uniform_spec(8)}) {
    const MomentProfile profile = analytic_profile(spec);
    for (int a : {2, 4, 6}) {
      for (int k = 3; k <= 8; ++k) {
        const Rational engine = exact_pair_moment(a, k, profile).value;
        const Rational even = composition_sum(a, k, profile, true);
        bool ok = engine == even;
        if (k <= 4) {
          const Rational all = composition_sum(a, k, profile, false);
          ok = ok && engine == all;
        }
        ++cases;
        if (!ok && pass) {
          pass = false;
          details.emplace_back("first_mismatch", spec.label() + " a=" +
                                                     std::to_string(a) +
                                                     " k=" + std::to_string(k));
        }
      }
    }
  }
  details.emplace_back("cases", std::to_string(cases));
  return make_result("exact-vs-bruteforce",
                     "exact rational equality, zero tolerance", pass,
                     std::move(details));
}

CheckResult check_exponential_quartic_closed_form() {
  const MomentProfile profile = analytic_profile(exponential_spec(4));
  bool pass = true;
  Details details;
  for (long k = 2; k <= 1000; ++k) {
    const ExactMomentResult result = exact_pair_moment(4, k, profile);
    const Rational expected_value = Rational(12) * k * k + Rational(12) * k;
    const Rational expected_leading = Rational(12) * k * k;
    if (result.value != expected_value ||
        result.leading_term != expected_leading ||
        result.remainder != Rational(12) * k) {
      pass = false;
      details.emplace_back("first_mismatch", "k=" + std::to_string(k));
      break;
    }
  }
  const auto ratios = remainder_ratio_scan(4, {10, 100, 1000}, profile);
  for (const auto& [k, ratio] : ratios) {
    if (ratio != 12.0) {
      pass = false;
      details.emplace_back("ratio_mismatch",
                           "k=" + std::to_string(k) + " ratio=" + format_double(ratio));
    }
  }
  details.emplace_back("k_range", "2..1000");
  details.emplace_back("remainder_over_k", "12");
  return make_result("closed-form-exponential-quartic",
                     "value = 12k^2 + 12k exactly; remainder/k = 12 exactly",
                     pass, std::move(details));
}

CheckResult check_mc_vs_exact(const VerifyOptions& options) {
  constexpr long kMinReps = 10000;
  if (options.replications < kMinReps)
    return make_skipped("mc-vs-exact", "|estimate - exact| <= 4 std errors",
                        kMinReps, options.replications);

  ProcessSpec gamma2;
  gamma2.family = Family::kGammaShape;
  gamma2.gamma_shape = 2.0;
  const std::vector<ProcessSpec> specs = {exponential_spec(), uniform_spec(),
                                          gamma2};
  const std::vector<long> k_grid = {5, 20, 100};
  const std::vector<double> b_list = {2, 4};

  bool pass = true;
  double worst_z = 0;
  std::string worst_case = "none";
  std::uint64_t stream = 3000;
  for (const ProcessSpec& spec : specs) {
    const MomentProfile profile = analytic_profile(spec);
    const auto grid =
        moment_sweep(spec, k_grid, nullptr, b_list, options.replications,
                     SeedSpec{options.master_seed, stream++}, options.workers);
    for (std::size_t bi = 0; bi < b_list.size(); ++bi) {
      for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
        const MomentEstimate& est = grid[bi][ki];
        const double exact = to_double(
            exact_pair_moment(static_cast<int>(b_list[bi]), k_grid[ki], profile)
                .value);
        const double z = (est.mean - exact) / est.std_error;
        if (std::fabs(z) > std::fabs(worst_z)) {
          worst_z = z;
          worst_case = spec.label() + " a=" + format_double(b_list[bi]) +
                       " k=" + std::to_string(k_grid[ki]);
        }
        if (std::fabs(z) > 4.0) pass = false;
      }
    }
  }
  Details details;
  details.emplace_back("worst_z", format_double(worst_z));
  details.emplace_back("worst_case", worst_case);
  return make_result("mc-vs-exact", "|estimate - exact| <= 4 std errors", pass,
                     std::move(details));
}

CheckResult check_shift_gap_bound(const VerifyOptions& options) {
  constexpr long kMinReps = 1000;
  if (options.replications < kMinReps)
    return make_skipped("shift-gap-bound",
                        "estimate <= C_a^a r^a / lambda^a + 4 std errors",
                        kMinReps, options.replications);

  const ProcessSpec spec = exponential_spec();
  bool pass = true;
  Details details;
  std::uint64_t stream = 4000;
  for (int a : {2, 4}) {
    for (long r : {1L, 2L, 5L}) {
      const ShiftGapResult result =
          shift_gap_check(a, 100, r, spec, options.replications,
                          SeedSpec{options.master_seed, stream++}, options.workers);
      const bool ok = result.estimate.mean <=
                      result.bound + 4.0 * result.estimate.std_error;
      if (!ok) pass = false;
      details.emplace_back(
          "a" + std::to_string(a) + "_r" + std::to_string(r),
          format_double(result.estimate.mean) + " <= " + format_double(result.bound));
    }
  }
  return make_result("shift-gap-bound",
                     "estimate <= C_a^a r^a / lambda^a + 4 std errors", pass,
                     std::move(details));
}

CheckResult check_moment_scaling_slopes(const VerifyOptions& options) {
  constexpr long kMinReps = 10000;
  if (options.replications < kMinReps)
    return make_skipped(
        "moment-scaling-slopes",
        "slope(b=2) = 1.00 +/- 0.05, slope(b=4) = 2.00 +/- 0.08, slope(b=1) <= 0.55",
        kMinReps, options.replications);

  const ProcessSpec spec = exponential_spec();
  const std::vector<long> k_grid = {10, 30, 100, 300, 1000};
  const auto grid =
      moment_sweep(spec, k_grid, nullptr, {1, 2, 4}, options.replications,
                   SeedSpec{options.master_seed, 5000}, options.workers);
  const SlopeFit fit1 = fit_log_log(grid[0]);
  const SlopeFit fit2 = fit_log_log(grid[1]);
  const SlopeFit fit4 = fit_log_log(grid[2]);

  const bool pass2 = std::fabs(fit2.slope - 1.0) <= 0.05;
  const bool pass4 = std::fabs(fit4.slope - 2.0) <= 0.08;
  const bool pass1 = fit1.slope <= 0.55;
  Details details;
  details.emplace_back("slope_b1", format_double(fit1.slope));
  details.emplace_back("slope_b2", format_double(fit2.slope));
  details.emplace_back("slope_b4", format_double(fit4.slope));
  return make_result(
      "moment-scaling-slopes",
      "slope(b=2) = 1.00 +/- 0.05, slope(b=4) = 2.00 +/- 0.08, slope(b=1) <= 0.55",
      pass1 && pass2 && pass4, std::move(details));
}

CheckResult check_matching_optimality(const VerifyOptions& options) {
  constexpr long kMinReps = 5000;
  if (options.replications < kMinReps)
    return make_skipped("matching-optimality",
                        "identity margin > 4 paired std errors; solver cost = "
                        "identity cost to 1e-12 relative",
                        kMinReps, options.replications);

  const ProcessSpec spec = exponential_spec();
  bool pass = true;
  double worst_margin_sigmas = std::numeric_limits<double>::infinity();
  std::uint64_t stream = 6000;
  for (int n : {2, 3, 4}) {
    for (double b : {1.0, 2.0, 3.0}) {
      const auto table =
          permutation_cost_table(n, b, spec, options.replications,
                                   SeedSpec{options.master_seed, stream++},
                                   options.workers);
      for (std::size_t p = 1; p < table.size(); ++p) {
        const PermutationRow& row = table[p];
        const double sigmas =
            row.margin_std_error > 0 ? row.margin / row.margin_std_error
                                     : std::numeric_limits<double>::infinity();
        worst_margin_sigmas = std::min(worst_margin_sigmas, sigmas);
        if (!(sigmas > 4.0)) pass = false;
      }
    }
  }

  // Pathwise: on sorted instances with convex cost the solver must land on
  // the identity matching's cost exactly (up to float round-off).
  double worst_rel = 0;
  const SeedSpec path_seed{options.master_seed, 6900};
  for (long instance = 0; instance < 1000; ++instance) {
    const auto index = static_cast<std::uint64_t>(instance);
    const auto black =
        arrival_prefix_sums(spec, 50, substream(path_seed, 2 * index));
    const auto white =
        arrival_prefix_sums(spec, 50, substream(path_seed, 2 * index + 1));
    const AssignmentResult solved = optimal_assignment(black, white, 2.0);
    double identity_cost = 0;
    for (std::size_t i = 0; i < black.size(); ++i)
      identity_cost += (black[i] - white[i]) * (black[i] - white[i]);
    const double rel =
        std::fabs(solved.cost - identity_cost) / std::max(identity_cost, 1e-300);
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-12) pass = false;
  }

  Details details;
  details.emplace_back("worst_margin_sigmas", format_double(worst_margin_sigmas));
  details.emplace_back("worst_pathwise_rel_error", format_double(worst_rel));
  return make_result("matching-optimality",
                     "identity margin > 4 paired std errors; solver cost = "
                     "identity cost to 1e-12 relative",
                     pass, std::move(details));
}

CheckResult check_transport_cost_scaling(const VerifyOptions& options) {
  constexpr long kMinReps = 10000;
  if (options.replications < kMinReps)
    return make_skipped("transport-cost-scaling",
                        "slope(b=2) = 2.00 +/- 0.05, slope(b=4) = 3.00 +/- "
                        "0.10, E[T_2(10)] = 110 +/- 4 std errors",
                        kMinReps, options.replications);

  const ProcessSpec spec = exponential_spec();
  const std::vector<long> n_grid = {10, 30, 100, 300};
  const auto grid = t_b_sweep(spec, n_grid, {2, 4}, options.replications,
                              SeedSpec{options.master_seed, 7000},
                              options.workers);
  const SlopeFit fit2 = fit_log_log(grid[0]);
  const SlopeFit fit4 = fit_log_log(grid[1]);

  // Independent route for the n = 10, b = 2 level: per-k exact values summed.
  const MomentProfile profile = analytic_profile(exponential_spec(4));
  double exact_t2 = 0;
  for (long k = 1; k <= 10; ++k)
    exact_t2 += to_double(exact_pair_moment(2, k, profile).value);
  const MomentEstimate& t2_10 = grid[0][0];
  const double z = (t2_10.mean - exact_t2) / t2_10.std_error;

  const bool pass = std::fabs(fit2.slope - 2.0) <= 0.05 &&
                    std::fabs(fit4.slope - 3.0) <= 0.10 && std::fabs(z) <= 4.0;
  Details details;
  details.emplace_back("slope_b2", format_double(fit2.slope));
  details.emplace_back("slope_b4", format_double(fit4.slope));
  details.emplace_back("exact_T2_n10", format_double(exact_t2));
  details.emplace_back("z_T2_n10", format_double(z));
  return make_result("transport-cost-scaling",
                     "slope(b=2) = 2.00 +/- 0.05, slope(b=4) = 3.00 +/- 0.10, "
                     "E[T_2(10)] = 110 +/- 4 std errors",
                     pass, std::move(details));
}

CheckResult check_rate_scaling(const VerifyOptions& options) {
  constexpr double kTol = 1e-12;
  constexpr long kReps = 2000;  // identity check; power is irrelevant
  bool pass = true;
  Details details;

  auto rel_diff = [](double x, double y) {
    const double scale = std::max({std::fabs(x), std::fabs(y), 1e-300});
    return std::fabs(x - y) / scale;
  };

  // Exact engine: lambda enters as an exact rational division.
  {
    const MomentProfile profile = analytic_profile(exponential_spec(4));
    const ExactMomentResult result = exact_pair_moment(4, 100, profile);
    const auto at1 = result.at_rate(1.0);
    const auto at5 = result.at_rate(5.0);
    const double factor = std::pow(5.0, -4.0);
    const double rel = rel_diff(at5.value, factor * at1.value);
    if (rel > kTol) pass = false;
    details.emplace_back("exact_rel", format_double(rel));
  }

  // Monte Carlo estimators under common random numbers.
  ProcessSpec at_rate1 = exponential_spec();
  ProcessSpec at_rate5 = exponential_spec();
  at_rate5.rate = 5.0;
  const SeedSpec seed{options.master_seed, 8000};
  {
    const double b = 2.5;
    MomentQuery q1{b, 20, 1, at_rate1, kReps};
    MomentQuery q5{b, 20, 1, at_rate5, kReps};
    const MomentEstimate e1 = estimate_moment(q1, seed, options.workers);
    const MomentEstimate e5 = estimate_moment(q5, seed, options.workers);
    const double factor = std::pow(5.0, -b);
    const double rel = std::max(rel_diff(e5.mean, factor * e1.mean),
                                rel_diff(e5.std_error, factor * e1.std_error));
    if (rel > kTol) pass = false;
    details.emplace_back("simulate_rel", format_double(rel));
  }
  {
    const double b = 3.0;
    const MomentEstimate e1 =
        estimate_T_b(10, b, at_rate1, kReps, seed, options.workers);
    const MomentEstimate e5 =
        estimate_T_b(10, b, at_rate5, kReps, seed, options.workers);
    const double factor = std::pow(5.0, -b);
    const double rel = rel_diff(e5.mean, factor * e1.mean);
    if (rel > kTol) pass = false;
    details.emplace_back("matching_rel", format_double(rel));
  }
  {
    const std::vector<long> k_grid = {10, 30, 100, 300};
    const auto g1 = moment_sweep(at_rate1, k_grid, nullptr, {2.0}, kReps, seed,
                                 options.workers);
    const auto g5 = moment_sweep(at_rate5, k_grid, nullptr, {2.0}, kReps, seed,
                                 options.workers);
    const double factor = std::pow(5.0, -2.0);
    double worst = 0;
    for (std::size_t i = 0; i < k_grid.size(); ++i)
      worst = std::max(worst, rel_diff(g5[0][i].mean, factor * g1[0][i].mean));
    if (worst > kTol) pass = false;
    details.emplace_back("scaling_rel", format_double(worst));
  }
  return make_result("rate-scaling",
                     "rate 5 outputs = 5^{-b} * rate 1 outputs, relative error "
                     "<= 1e-12 under common random numbers",
                     pass, std::move(details));
}

CheckResult check_determinism(const VerifyOptions& options) {
  constexpr long kReps = 10000;  // spans multiple accumulation chunks
  const ProcessSpec spec = exponential_spec();
  const SeedSpec seed{options.master_seed, 9000};
  bool pass = true;
  Details details;

  const MomentQuery query{2.0, 50, 0, spec, kReps};
  const MomentEstimate first = estimate_moment(query, seed, 1);
  const MomentEstimate second = estimate_moment(query, seed, 1);
  const MomentEstimate threaded = estimate_moment(query, seed, 4);
  if (first.mean != second.mean || first.std_error != second.std_error) {
    pass = false;
    details.emplace_back("rerun", "mismatch");
  }
  if (first.mean != threaded.mean || first.std_error != threaded.std_error) {
    pass = false;
    details.emplace_back("workers", "mismatch");
  }

  const auto table1 = permutation_cost_table(3, 2.0, spec, kReps, seed, 1);
  const auto table4 = permutation_cost_table(3, 2.0, spec, kReps, seed, 4);
  for (std::size_t p = 0; p < table1.size(); ++p) {
    if (table1[p].mean_cost != table4[p].mean_cost ||
        table1[p].margin != table4[p].margin) {
      pass = false;
      details.emplace_back("permutation_table", "mismatch");
      break;
    }
  }
  details.emplace_back("mean", format_double(first.mean));
  return make_result("determinism",
                     "bit-identical estimates across reruns and worker counts",
                     pass, std::move(details));
}

CheckResult check_jensen_moment_chain(const VerifyOptions& options) {
  constexpr long kMinReps = 5000;
  if (options.replications < kMinReps)
    return make_skipped("jensen-moment-chain",
                        "estimate(b)^{c/b} <= estimate(c) + 4 propagated std errors",
                        kMinReps, options.replications);

  const ProcessSpec spec = exponential_spec();
  const long k = 50;
  const std::vector<double> b_list = {1.0, 1.5, 2.0, 3.0, 4.0};
  const auto grid =
      moment_sweep(spec, {k}, nullptr, b_list, options.replications,
                   SeedSpec{options.master_seed, 10000}, options.workers);
  auto estimate = [&](double b) -> const MomentEstimate& {
    for (std::size_t i = 0; i < b_list.size(); ++i)
      if (b_list[i] == b) return grid[i][0];
    throw std::logic_error("exponent missing from sweep");
  };

  bool pass = true;
  Details details;
  auto check_pair = [&](double b, double c, const std::string& tag) {
    const MomentEstimate& low = estimate(b);
    const MomentEstimate& high = estimate(c);
    const double exponent = c / b;
    const double lifted = std::pow(low.mean, exponent);
    const double lifted_sigma =
        exponent * std::pow(low.mean, exponent - 1.0) * low.std_error;
    const double slack =
        4.0 * std::sqrt(lifted_sigma * lifted_sigma +
                        high.std_error * high.std_error);
    const bool ok = lifted <= high.mean + slack;
    if (!ok) pass = false;
    details.emplace_back(tag, format_double(lifted) + " <= " +
                                  format_double(high.mean + slack));
  };
  check_pair(1.0, 2.0, "b1_to_c2");
  check_pair(1.5, 2.0, "b1.5_to_c2");
  check_pair(3.0, 4.0, "b3_to_c4");
  check_pair(2.0, 3.0, "lower_b3");
  check_pair(2.0, 4.0, "lower_b4");
  return make_result("jensen-moment-chain",
                     "estimate(b)^{c/b} <= estimate(c) + 4 propagated std errors",
                     pass, std::move(details));
}

CheckResult check_remainder_growth_bound() {
  const MomentProfile uniform = analytic_profile(uniform_spec(6));
  const auto ratios = remainder_ratio_scan(6, {10, 50, 250}, uniform);
  bool pass = true;
  Details details;
  // The O-constant is never explicit; boundedness is asserted with a factor-2
  // allowance on the smallest grid point, plus convergence of the ratios.
  const double fitted = 2.0 * ratios.front().second;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (ratios[i].second > fitted) pass = false;
  for (std::size_t i = 2; i < ratios.size(); ++i)
    if (std::fabs(ratios[i].second - ratios[i - 1].second) >
        std::fabs(ratios[i - 1].second - ratios[i - 2].second))
      pass = false;
  for (const auto& [k, ratio] : ratios)
    details.emplace_back("ratio_k" + std::to_string(k), format_double(ratio));

  // a = 2 has a single partition term, so the remainder vanishes identically.
  const auto flat = remainder_ratio_scan(2, {5, 50, 500}, uniform);
  for (const auto& [k, ratio] : flat)
    if (ratio != 0.0) pass = false;
  return make_result("remainder-growth-bound",
                     "|remainder|/k^{a/2-1} bounded by 2x its smallest-k value "
                     "and converging; exactly 0 for a = 2",
                     pass, std::move(details));
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  results.push_back(check_exact_vs_bruteforce());
  results.push_back(check_exponential_quartic_closed_form());
  results.push_back(check_mc_vs_exact(options));
  results.push_back(check_shift_gap_bound(options));
  results.push_back(check_moment_scaling_slopes(options));
  results.push_back(check_matching_optimality(options));
  results.push_back(check_transport_cost_scaling(options));
  results.push_back(check_rate_scaling(options));
  results.push_back(check_determinism(options));
  results.push_back(check_jensen_moment_chain(options));
  results.push_back(check_remainder_growth_bound());
  return results;
}

}  // namespace renewal
