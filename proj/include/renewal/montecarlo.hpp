#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "renewal/distributions.hpp"

namespace renewal {

// Welford accumulator with deterministic pairwise merge. Sweeps accumulate
// per chunk and merge chunks in index order, so results do not depend on the
// number of workers.
class RunningStat {
 public:
  void add(double x);
  void merge(const RunningStat& other);
  long long count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const;   // unbiased sample variance
  double std_error() const;  // sqrt(variance / count)

 private:
  long long count_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

struct MomentQuery {
  double b = 2;           // exponent, > 0
  long k = 1;             // index of the Y_k arrival
  long r = 0;             // shift applied to the X process
  ProcessSpec spec;
  long replications = 100000;  // >= 100; below that standard errors are noise
};

struct MomentEstimate {
  double mean = 0;
  double std_error = 0;
  long replications = 0;
  double b = 0;
  long k = 0;
  long r = 0;
};

struct SlopeFit {
  double slope = 0;
  double intercept = 0;  // of the log-log least-squares line
  double r_squared = 0;
  std::vector<MomentEstimate> points;  // one per grid entry, k (or n) echoed
};

// Least-squares fit of log(mean) against log(k) over the points.
SlopeFit fit_log_log(std::vector<MomentEstimate> points);

// |x + y|^b with fast paths for small integer exponents.
double abs_pow(double x, double b);

// Sample mean of |X_{k+r} - Y_k|^b over independent replications, each
// replication on fresh xi/tau streams. lambda enters once, as a final
// lambda^{-b} factor on mean and standard error.
MomentEstimate estimate_moment(const MomentQuery& query, const SeedSpec& seed,
                               int workers = 1);

// Paired estimates over a (k, b) grid: within one replication every grid
// point reads the same xi/tau prefix sums, which is free variance reduction
// and keeps the per-point estimates exactly comparable.
// Result is indexed [b_index][k_index]. r_of_k may be null for r = 0.
std::vector<std::vector<MomentEstimate>> moment_sweep(
    const ProcessSpec& spec, const std::vector<long>& k_grid,
    const std::function<long(long)>& r_of_k, const std::vector<double>& b_list,
    long replications, const SeedSpec& seed, int workers = 1);

struct ShiftGapResult {
  MomentEstimate estimate;  // of E|X_{k+r} - X_k|^a
  double bound;             // C_a^a r^a / lambda^a with C_a = max_{p<=a} m_p
};

// Both sides of the shift-gap inequality. X_{k+r} - X_k involves only the r
// increments past index k, so the simulation draws exactly those; k is echoed.
ShiftGapResult shift_gap_check(int a, long k, long r, const ProcessSpec& spec,
                               long replications, const SeedSpec& seed,
                               int workers = 1);

// Log-log slope of the estimated moment across k_grid. The grid must have at
// least 4 points spanning a decade, and r_of_k(k) <= sqrt(k)/4 (the concrete
// finite-sample reading of r = o(sqrt(k))).
SlopeFit fit_scaling_exponent(double b, const std::vector<long>& k_grid,
                              const std::function<long(long)>& r_of_k,
                              const ProcessSpec& spec, long replications,
                              const SeedSpec& seed, int workers = 1);

// |x+y|^a <= 2^{a-1}(|x|^a + |y|^a) for a >= 1; a property-test predicate,
// evaluated with a float-roundoff guard band.
bool convexity_split_check(double a, double x, double y);

// Bootstrap standard error of the estimate's mean, a diagnostic for the
// heavy-tailed |.|^b samples where the plug-in normal approximation is
// suspect. Replays the same draws as estimate_moment under the same seed;
// deterministic.
double bootstrap_std_error(const MomentQuery& query, const SeedSpec& seed,
                           long resamples = 200);

namespace detail {

// Deterministic replication harness. fn fills n_slots values per replication
// from its two streams; accumulation is chunked by replication index and
// chunks merge in order, independent of worker count.
using ReplicationFn =
    std::function<void(std::uint64_t rep, StreamRng& xi, StreamRng& tau, double* out)>;

std::vector<RunningStat> replicate(long replications, std::size_t n_slots,
                                   const SeedSpec& seed, int workers,
                                   const ReplicationFn& fn);

}  // namespace detail

}  // namespace renewal
