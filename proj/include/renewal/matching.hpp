#pragma once

#include <span>
#include <vector>

#include "renewal/montecarlo.hpp"

namespace renewal {

// Positions of n black and n white sensors on the line, plus the index
// permutation defining which white sensor each black sensor is matched to.
// Both position sequences must be strictly increasing.
struct MatchingInstance {
  std::vector<double> black;
  std::vector<double> white;
  std::vector<int> permutation;  // 0-based; edge {black[i], white[permutation[i]]}
};

struct CostReport {
  double b = 0;
  double pathwise_cost = 0;  // sum_i |black[i] - white[perm[i]]|^b
  int n = 0;
};

// Validates the instance and evaluates its transportation cost to power b.
CostReport matching_cost(const MatchingInstance& instance, double b);

struct AssignmentResult {
  std::vector<int> permutation;  // 0-based, row i matched to column perm[i]
  double cost = 0;
};

// Exact minimum-cost perfect matching under cost |black[i] - white[j]|^b,
// by shortest augmenting paths with potentials (O(n^3)). Among cost-ties the
// lexicographically smallest permutation is reported. n is capped at 10^4,
// the budget for a cubic-time dense solve.
AssignmentResult optimal_assignment(std::span<const double> black,
                                    std::span<const double> white, double b);

// Monte Carlo mean of sum_{k<=n} |X_k - Y_k|^b, the identity matching's
// transportation cost; k echoes n in the returned estimate.
MomentEstimate estimate_T_b(long n, double b, const ProcessSpec& spec,
                            long replications, const SeedSpec& seed,
                            int workers = 1);

// Paired T_b estimates across an n grid (one path per replication, costs
// read off cumulatively). Result indexed [b_index][n_index].
std::vector<std::vector<MomentEstimate>> t_b_sweep(
    const ProcessSpec& spec, const std::vector<long>& n_grid,
    const std::vector<double>& b_list, long replications, const SeedSpec& seed,
    int workers = 1);

// Log-log slope of estimated T_b against n; grid rules as in
// fit_scaling_exponent.
SlopeFit fit_T_b_scaling(double b, const std::vector<long>& n_grid,
                         const ProcessSpec& spec, long replications,
                         const SeedSpec& seed, int workers = 1);

struct PermutationRow {
  std::vector<int> permutation;  // 0-based
  double mean_cost = 0;
  double std_error = 0;
  // Paired margin versus the identity permutation under common random
  // numbers; zero for the identity row itself.
  double margin = 0;
  double margin_std_error = 0;
};

// Mean cost of every fixed index permutation (all n! of them, n <= 6) under
// common random numbers, in lexicographic permutation order. The identity
// permutation is always the first row.
std::vector<PermutationRow> permutation_cost_table(int n, double b,
                                                     const ProcessSpec& spec,
                                                     long replications,
                                                     const SeedSpec& seed,
                                                     int workers = 1);

}  // namespace renewal
