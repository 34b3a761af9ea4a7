#include "renewal/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace renewal {

namespace {

constexpr long kChunkSize = 4096;  // fixed; reduction order must not move

void validate_query(const MomentQuery& query) {
  if (!(query.b > 0)) throw std::invalid_argument("exponent b must be positive");
  if (query.k < 1) throw std::invalid_argument("k must be >= 1");
  if (query.r < 0) throw std::invalid_argument("shift r must be >= 0");
  if (query.replications < 100)
    throw std::invalid_argument(
        "replications must be >= 100; standard errors are meaningless below that");
  if (!(query.spec.rate > 0))
    throw std::invalid_argument("rate lambda must be positive");
}

}  // namespace

void RunningStat::add(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

void RunningStat::merge(const RunningStat& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(count_ + other.count_);
  const double delta = other.mean_ - mean_;
  m2_ += other.m2_ + delta * delta * static_cast<double>(count_) *
                         static_cast<double>(other.count_) / total;
  mean_ += delta * static_cast<double>(other.count_) / total;
  count_ += other.count_;
}

double RunningStat::variance() const {
  // m2 is non-negative in exact arithmetic; clamp away rounding noise
  return count_ > 1 ? std::max(m2_, 0.0) / static_cast<double>(count_ - 1) : 0.0;
}

double RunningStat::std_error() const {
  return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
}

double abs_pow(double x, double b) {
  const double a = std::fabs(x);
  if (b == 1.0) return a;
  if (b == 2.0) return a * a;
  if (b == 3.0) return a * a * a;
  if (b == 4.0) {
    const double s = a * a;
    return s * s;
  }
  return std::pow(a, b);
}

namespace detail {

std::vector<RunningStat> replicate(long replications, std::size_t n_slots,
                                   const SeedSpec& seed, int workers,
                                   const ReplicationFn& fn) {
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  const long n_chunks = (replications + kChunkSize - 1) / kChunkSize;
  std::vector<std::vector<RunningStat>> chunk_stats(
      static_cast<size_t>(n_chunks), std::vector<RunningStat>(n_slots));

  auto run_chunk = [&](long chunk, std::vector<double>& values) {
    const long begin = chunk * kChunkSize;
    const long end = std::min(replications, begin + kChunkSize);
    std::vector<RunningStat>& stats = chunk_stats[static_cast<size_t>(chunk)];
    for (long rep = begin; rep < end; ++rep) {
      const auto index = static_cast<std::uint64_t>(rep);
      StreamRng xi(substream(seed, 2 * index));
      StreamRng tau(substream(seed, 2 * index + 1));
      fn(index, xi, tau, values.data());
      for (std::size_t s = 0; s < n_slots; ++s) stats[s].add(values[s]);
    }
  };

  const int n_workers =
      static_cast<int>(std::min<long>(std::max(workers, 1), n_chunks));
  if (n_workers <= 1) {
    std::vector<double> values(n_slots);
    for (long chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk, values);
  } else {
    std::atomic<long> next_chunk{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
      std::vector<double> values(n_slots);
      for (;;) {
        const long chunk = next_chunk.fetch_add(1);
        if (chunk >= n_chunks) return;
        try {
          run_chunk(chunk, values);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<RunningStat> merged(n_slots);
  for (const auto& chunk : chunk_stats)
    for (std::size_t s = 0; s < n_slots; ++s) merged[s].merge(chunk[s]);
  return merged;
}

}  // namespace detail

std::vector<std::vector<MomentEstimate>> moment_sweep(
    const ProcessSpec& spec, const std::vector<long>& k_grid,
    const std::function<long(long)>& r_of_k, const std::vector<double>& b_list,
    long replications, const SeedSpec& seed, int workers) {
  if (k_grid.empty() || b_list.empty())
    throw std::invalid_argument("moment sweep needs a non-empty grid");
  for (double b : b_list)
    if (!(b > 0)) throw std::invalid_argument("exponent b must be positive");
  if (!(spec.rate > 0)) throw std::invalid_argument("rate lambda must be positive");

  const std::size_t nk = k_grid.size();
  const std::size_t nb = b_list.size();
  std::vector<long> shifts(nk, 0);
  long max_xi = 0;
  long max_tau = 0;
  for (std::size_t i = 0; i < nk; ++i) {
    const long k = k_grid[i];
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const long r = r_of_k ? r_of_k(k) : 0;
    if (r < 0) throw std::invalid_argument("shift r must be >= 0");
    shifts[i] = r;
    max_xi = std::max(max_xi, k + r);
    max_tau = std::max(max_tau, k);
  }

  // Checkpoints where a prefix sum must be captured, sorted by index.
  auto checkpoints = [nk](const std::vector<long>& targets) {
    std::vector<std::pair<long, std::size_t>> cps(nk);
    for (std::size_t i = 0; i < nk; ++i) cps[i] = {targets[i], i};
    std::sort(cps.begin(), cps.end());
    return cps;
  };
  std::vector<long> xi_targets(nk);
  std::vector<long> tau_targets(nk);
  for (std::size_t i = 0; i < nk; ++i) {
    xi_targets[i] = k_grid[i] + shifts[i];
    tau_targets[i] = k_grid[i];
  }
  const auto xi_cps = checkpoints(xi_targets);
  const auto tau_cps = checkpoints(tau_targets);

  auto fn = [&](std::uint64_t, StreamRng& xi, StreamRng& tau, double* out) {
    double sums[2] = {0, 0};
    double captured_xi[64];
    double captured_tau[64];
    double* captured[2] = {captured_xi, captured_tau};
    thread_local std::vector<double> big_xi, big_tau;
    if (nk > 64) {
      big_xi.resize(nk);
      big_tau.resize(nk);
      captured[0] = big_xi.data();
      captured[1] = big_tau.data();
    }
    auto walk = [&](StreamRng& rng, long max_index,
                    const std::vector<std::pair<long, std::size_t>>& cps,
                    int which) {
      double sum = 0;
      std::size_t cp = 0;
      for (long j = 1; j <= max_index; ++j) {
        sum += rng.increment(spec);
        while (cp < cps.size() && cps[cp].first == j)
          captured[which][cps[cp++].second] = sum;
      }
      sums[which] = sum;
    };
    walk(xi, max_xi, xi_cps, 0);
    walk(tau, max_tau, tau_cps, 1);
    for (std::size_t i = 0; i < nk; ++i) {
      const double diff = captured[0][i] - captured[1][i];
      for (std::size_t j = 0; j < nb; ++j)
        out[j * nk + i] = abs_pow(diff, b_list[j]);
    }
  };

  const auto stats = detail::replicate(replications, nk * nb, seed, workers, fn);
  std::vector<std::vector<MomentEstimate>> result(nb,
                                                  std::vector<MomentEstimate>(nk));
  for (std::size_t j = 0; j < nb; ++j) {
    const double scale = std::pow(spec.rate, -b_list[j]);
    for (std::size_t i = 0; i < nk; ++i) {
      const RunningStat& s = stats[j * nk + i];
      MomentEstimate& e = result[j][i];
      e.mean = scale * s.mean();
      e.std_error = scale * s.std_error();
      e.replications = replications;
      e.b = b_list[j];
      e.k = k_grid[i];
      e.r = shifts[i];
    }
  }
  return result;
}

MomentEstimate estimate_moment(const MomentQuery& query, const SeedSpec& seed,
                               int workers) {
  validate_query(query);
  const long r = query.r;
  auto grid = moment_sweep(
      query.spec, {query.k}, [r](long) { return r; }, {query.b},
      query.replications, seed, workers);
  return grid[0][0];
}

ShiftGapResult shift_gap_check(int a, long k, long r, const ProcessSpec& spec,
                               long replications, const SeedSpec& seed,
                               int workers) {
  if (a < 2 || a % 2 != 0)
    throw std::invalid_argument("shift gap exponent a must be a positive even integer");
  if (k < 1 || r < 1)
    throw std::invalid_argument("shift gap requires k >= 1 and r >= 1");
  if (a > spec.max_order)
    throw OrderInsufficientError(a, spec.max_order);

  const double b = static_cast<double>(a);
  auto fn = [&](std::uint64_t, StreamRng& xi, StreamRng&, double* out) {
    double sum = 0;
    for (long j = 0; j < r; ++j) sum += xi.increment(spec);
    out[0] = abs_pow(sum, b);
  };
  const auto stats = detail::replicate(replications, 1, seed, workers, fn);

  const double scale = std::pow(spec.rate, -b);
  ShiftGapResult result;
  result.estimate.mean = scale * stats[0].mean();
  result.estimate.std_error = scale * stats[0].std_error();
  result.estimate.replications = replications;
  result.estimate.b = b;
  result.estimate.k = k;
  result.estimate.r = r;

  const double c_a = to_double(analytic_profile(spec).moment_bound(a));
  result.bound = std::pow(c_a, b) * std::pow(static_cast<double>(r), b) * scale;
  return result;
}

SlopeFit fit_log_log(std::vector<MomentEstimate> points) {
  if (points.size() < 2)
    throw std::invalid_argument("slope fit needs at least two points");
  const double n = static_cast<double>(points.size());
  double mean_x = 0;
  double mean_y = 0;
  for (const MomentEstimate& p : points) {
    if (!(p.mean > 0))
      throw std::domain_error("slope fit requires strictly positive estimates");
    mean_x += std::log(static_cast<double>(p.k));
    mean_y += std::log(p.mean);
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0;
  double sxy = 0;
  double syy = 0;
  for (const MomentEstimate& p : points) {
    const double dx = std::log(static_cast<double>(p.k)) - mean_x;
    const double dy = std::log(p.mean) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  const double ss_res = syy - fit.slope * sxy;
  fit.r_squared = syy > 0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.points = std::move(points);
  return fit;
}

SlopeFit fit_scaling_exponent(double b, const std::vector<long>& k_grid,
                              const std::function<long(long)>& r_of_k,
                              const ProcessSpec& spec, long replications,
                              const SeedSpec& seed, int workers) {
  if (!(b > 0)) throw std::invalid_argument("exponent b must be positive");
  if (k_grid.size() < 4)
    throw std::invalid_argument("scaling grid too narrow: need at least 4 points");
  for (std::size_t i = 1; i < k_grid.size(); ++i)
    if (k_grid[i] <= k_grid[i - 1])
      throw std::invalid_argument("scaling grid must be strictly increasing");
  if (k_grid.front() < 1 ||
      k_grid.back() < 10 * k_grid.front())
    throw std::invalid_argument(
        "scaling grid too narrow: must span at least one decade (max >= 10 * min)");
  for (long k : k_grid) {
    const long r = r_of_k ? r_of_k(k) : 0;
    if (r < 0) throw std::invalid_argument("shift rule must be non-negative");
    if (static_cast<double>(r) > std::sqrt(static_cast<double>(k)) / 4.0)
      throw std::invalid_argument(
          "shift rule violates r <= sqrt(k)/4 at k = " + std::to_string(k) +
          " (finite-sample reading of r = o(sqrt(k)))");
  }
  auto grid = moment_sweep(spec, k_grid, r_of_k, {b}, replications, seed, workers);
  return fit_log_log(std::move(grid[0]));
}

double bootstrap_std_error(const MomentQuery& query, const SeedSpec& seed,
                           long resamples) {
  validate_query(query);
  if (resamples < 2)
    throw std::invalid_argument("bootstrap needs at least 2 resamples");

  // Same substream layout and walk as estimate_moment, values kept.
  const std::size_t n = static_cast<std::size_t>(query.replications);
  std::vector<double> values(n);
  for (std::size_t rep = 0; rep < n; ++rep) {
    StreamRng xi(substream(seed, 2 * rep));
    StreamRng tau(substream(seed, 2 * rep + 1));
    double sx = 0;
    for (long j = 0; j < query.k + query.r; ++j) sx += xi.increment(query.spec);
    double st = 0;
    for (long j = 0; j < query.k; ++j) st += tau.increment(query.spec);
    values[rep] = abs_pow(sx - st, query.b);
  }

  StreamRng rng(substream(seed, 0xB007ULL));
  RunningStat resample_means;
  for (long s = 0; s < resamples; ++s) {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i)
      sum += values[static_cast<std::size_t>(rng.next_u64() % n)];
    resample_means.add(sum / static_cast<double>(n));
  }
  return std::pow(query.spec.rate, -query.b) *
         std::sqrt(resample_means.variance());
}

bool convexity_split_check(double a, double x, double y) {
  if (!(a >= 1)) throw std::invalid_argument("convexity split requires a >= 1");
  const double lhs = abs_pow(x + y, a);
  const double rhs = std::pow(2.0, a - 1.0) * (abs_pow(x, a) + abs_pow(y, a));
  // guard band for round-off at equality cases like x == y
  return lhs <= rhs * (1.0 + 1e-12) + 1e-300;
}

}  // namespace renewal
