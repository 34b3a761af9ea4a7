#include "renewal/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace renewal {

namespace {

constexpr long kDenseSolverCap = 10000;

void require_strictly_increasing(const std::vector<double>& xs, const char* name) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw std::invalid_argument(std::string(name) +
                                  " positions must be strictly increasing");
}

void validate_instance(const MatchingInstance& inst) {
  const std::size_t n = inst.black.size();
  if (n == 0) throw std::invalid_argument("matching instance must be non-empty");
  if (inst.white.size() != n || inst.permutation.size() != n)
    throw std::invalid_argument(
        "black, white and permutation must all have the same length");
  require_strictly_increasing(inst.black, "black");
  require_strictly_increasing(inst.white, "white");
  std::vector<bool> seen(n, false);
  for (int j : inst.permutation) {
    if (j < 0 || static_cast<std::size_t>(j) >= n || seen[static_cast<size_t>(j)])
      throw std::invalid_argument("permutation must be a bijection on {0..n-1}");
    seen[static_cast<size_t>(j)] = true;
  }
}

// Shortest augmenting path assignment (Jonker-Volgenant style) on a dense
// cost matrix, 1-based internally with column 0 as the virtual root.
// Returns row -> column (0-based) and fills the dual potentials.
std::vector<int> solve_dense_assignment(const std::vector<double>& cost, int n,
                                        std::vector<double>& u,
                                        std::vector<double>& v) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  u.assign(static_cast<size_t>(n) + 1, 0.0);
  v.assign(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> col_to_row(static_cast<size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    col_to_row[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, kInf);
    std::vector<bool> used(static_cast<size_t>(n) + 1, false);
    do {
      used[static_cast<size_t>(j0)] = true;
      const int i0 = col_to_row[static_cast<size_t>(j0)];
      double delta = kInf;
      int j1 = -1;
      const double* row = cost.data() + static_cast<size_t>(i0 - 1) * n;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double reduced = row[j - 1] - u[static_cast<size_t>(i0)] -
                               v[static_cast<size_t>(j)];
        if (reduced < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = reduced;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(col_to_row[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      col_to_row[static_cast<size_t>(j0)] = col_to_row[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    row_to_col[static_cast<size_t>(col_to_row[static_cast<size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

// Kuhn augmenting search over an adjacency structure, honouring forced rows.
bool try_augment(int row, const std::vector<std::vector<int>>& adjacency,
                 std::vector<int>& col_owner, std::vector<bool>& visited,
                 int first_free_row) {
  for (int j : adjacency[static_cast<size_t>(row)]) {
    if (visited[static_cast<size_t>(j)]) continue;
    visited[static_cast<size_t>(j)] = true;
    const int owner = col_owner[static_cast<size_t>(j)];
    if (owner < 0 || (owner >= first_free_row &&
                      try_augment(owner, adjacency, col_owner, visited,
                                  first_free_row))) {
      col_owner[static_cast<size_t>(j)] = row;
      return true;
    }
  }
  return false;
}

// Rewrites an optimal assignment into the lexicographically smallest one
// among matchings supported on (near-)tight edges. Complementary slackness
// makes every alternative optimum live on reduced-cost-zero edges; the guard
// at the call site rejects the rewrite if tolerance let a worse matching in.
std::vector<int> lexicographic_refine(const std::vector<double>& cost, int n,
                                      const std::vector<double>& u,
                                      const std::vector<double>& v,
                                      const std::vector<int>& initial) {
  double scale = 1.0;
  for (double c : cost) scale = std::max(scale, std::fabs(c));
  const double tol = 1e-12 * scale;

  std::vector<std::vector<int>> adjacency(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double* row = cost.data() + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double reduced =
          row[j] - u[static_cast<size_t>(i) + 1] - v[static_cast<size_t>(j) + 1];
      if (reduced <= tol) adjacency[static_cast<size_t>(i)].push_back(j);
    }
  }

  std::vector<int> col_owner(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) col_owner[static_cast<size_t>(initial[static_cast<size_t>(i)])] = i;

  std::vector<int> result(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int current = [&] {
      for (int j = 0; j < n; ++j)
        if (col_owner[static_cast<size_t>(j)] == i) return j;
      return -1;
    }();
    bool fixed = false;
    for (int j : adjacency[static_cast<size_t>(i)]) {
      if (j >= current) break;  // only strictly smaller columns can improve
      const int owner = col_owner[static_cast<size_t>(j)];
      if (owner >= 0 && owner < i) continue;  // already fixed to a lower row
      // Move row i onto column j; re-seat the displaced owner if any.
      col_owner[static_cast<size_t>(current)] = -1;
      col_owner[static_cast<size_t>(j)] = i;
      if (owner < 0) {
        fixed = true;
      } else {
        std::vector<bool> visited(static_cast<size_t>(n), false);
        // Columns fixed to rows < i (and j itself) are off limits.
        for (int jj = 0; jj < n; ++jj)
          if (col_owner[static_cast<size_t>(jj)] >= 0 &&
              col_owner[static_cast<size_t>(jj)] <= i)
            visited[static_cast<size_t>(jj)] = true;
        if (try_augment(owner, adjacency, col_owner, visited, i + 1)) {
          fixed = true;
        } else {
          col_owner[static_cast<size_t>(j)] = owner;  // undo
          col_owner[static_cast<size_t>(current)] = i;
        }
      }
      if (fixed) break;
    }
    const int chosen = [&] {
      for (int j = 0; j < n; ++j)
        if (col_owner[static_cast<size_t>(j)] == i) return j;
      return -1;
    }();
    result[static_cast<size_t>(i)] = chosen;
  }
  return result;
}

}  // namespace

CostReport matching_cost(const MatchingInstance& instance, double b) {
  if (!(b > 0)) throw std::invalid_argument("exponent b must be positive");
  validate_instance(instance);
  const std::size_t n = instance.black.size();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i)
    total += abs_pow(
        instance.black[i] - instance.white[static_cast<size_t>(
                                instance.permutation[i])],
        b);
  return CostReport{b, total, static_cast<int>(n)};
}

AssignmentResult optimal_assignment(std::span<const double> black,
                                    std::span<const double> white, double b) {
  if (!(b > 0)) throw std::invalid_argument("exponent b must be positive");
  if (black.size() != white.size())
    throw std::invalid_argument("black and white position counts must match");
  const long n = static_cast<long>(black.size());
  if (n < 1) throw std::invalid_argument("assignment needs at least one sensor");
  if (n > kDenseSolverCap)
    throw std::invalid_argument("assignment solver capped at n <= 10000");

  std::vector<double> cost(static_cast<size_t>(n) * static_cast<size_t>(n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      cost[static_cast<size_t>(i) * static_cast<size_t>(n) +
           static_cast<size_t>(j)] =
          abs_pow(black[static_cast<size_t>(i)] - white[static_cast<size_t>(j)], b);

  std::vector<double> u;
  std::vector<double> v;
  std::vector<int> assignment =
      solve_dense_assignment(cost, static_cast<int>(n), u, v);

  auto total = [&](const std::vector<int>& perm) {
    double sum = 0;
    for (long i = 0; i < n; ++i)
      sum += cost[static_cast<size_t>(i) * static_cast<size_t>(n) +
                  static_cast<size_t>(perm[static_cast<size_t>(i)])];
    return sum;
  };

  const double solver_cost = total(assignment);
  std::vector<int> refined =
      lexicographic_refine(cost, static_cast<int>(n), u, v, assignment);
  bool refined_valid = std::all_of(refined.begin(), refined.end(),
                                   [](int j) { return j >= 0; });
  if (refined_valid) {
    double scale = 1.0;
    for (double c : cost) scale = std::max(scale, std::fabs(c));
    refined_valid = total(refined) <= solver_cost + 1e-9 * scale;
  }

  AssignmentResult result;
  result.permutation = refined_valid ? std::move(refined) : std::move(assignment);
  result.cost = total(result.permutation);
  return result;
}

MomentEstimate estimate_T_b(long n, double b, const ProcessSpec& spec,
                            long replications, const SeedSpec& seed,
                            int workers) {
  auto grid = t_b_sweep(spec, {n}, {b}, replications, seed, workers);
  return grid[0][0];
}

std::vector<std::vector<MomentEstimate>> t_b_sweep(
    const ProcessSpec& spec, const std::vector<long>& n_grid,
    const std::vector<double>& b_list, long replications, const SeedSpec& seed,
    int workers) {
  if (n_grid.empty() || b_list.empty())
    throw std::invalid_argument("T_b sweep needs a non-empty grid");
  for (long n : n_grid)
    if (n < 1) throw std::invalid_argument("n must be >= 1");
  for (double b : b_list)
    if (!(b > 0)) throw std::invalid_argument("exponent b must be positive");
  if (!(spec.rate > 0)) throw std::invalid_argument("rate lambda must be positive");
  if (replications < 100)
    throw std::invalid_argument(
        "replications must be >= 100; standard errors are meaningless below that");

  const std::size_t nn = n_grid.size();
  const std::size_t nb = b_list.size();
  std::vector<std::pair<long, std::size_t>> cps(nn);
  for (std::size_t i = 0; i < nn; ++i) cps[i] = {n_grid[i], i};
  std::sort(cps.begin(), cps.end());
  const long max_n = cps.back().first;

  auto fn = [&](std::uint64_t, StreamRng& xi, StreamRng& tau, double* out) {
    double sx = 0;
    double st = 0;
    double running[8];
    thread_local std::vector<double> big_running;
    double* cost = running;
    if (nb > 8) {
      big_running.assign(nb, 0.0);
      cost = big_running.data();
    } else {
      std::fill(cost, cost + nb, 0.0);
    }
    std::size_t cp = 0;
    for (long k = 1; k <= max_n; ++k) {
      sx += xi.increment(spec);
      st += tau.increment(spec);
      const double diff = sx - st;
      for (std::size_t j = 0; j < nb; ++j) cost[j] += abs_pow(diff, b_list[j]);
      while (cp < cps.size() && cps[cp].first == k) {
        const std::size_t slot = cps[cp].second;
        for (std::size_t j = 0; j < nb; ++j) out[j * nn + slot] = cost[j];
        ++cp;
      }
    }
  };

  const auto stats = detail::replicate(replications, nn * nb, seed, workers, fn);
  std::vector<std::vector<MomentEstimate>> result(nb,
                                                  std::vector<MomentEstimate>(nn));
  for (std::size_t j = 0; j < nb; ++j) {
    const double scale = std::pow(spec.rate, -b_list[j]);
    for (std::size_t i = 0; i < nn; ++i) {
      const RunningStat& s = stats[j * nn + i];
      MomentEstimate& e = result[j][i];
      e.mean = scale * s.mean();
      e.std_error = scale * s.std_error();
      e.replications = replications;
      e.b = b_list[j];
      e.k = n_grid[i];
      e.r = 0;
    }
  }
  return result;
}

SlopeFit fit_T_b_scaling(double b, const std::vector<long>& n_grid,
                         const ProcessSpec& spec, long replications,
                         const SeedSpec& seed, int workers) {
  if (!(b > 0)) throw std::invalid_argument("exponent b must be positive");
  if (n_grid.size() < 4)
    throw std::invalid_argument("scaling grid too narrow: need at least 4 points");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("scaling grid must be strictly increasing");
  if (n_grid.front() < 1 || n_grid.back() < 10 * n_grid.front())
    throw std::invalid_argument(
        "scaling grid too narrow: must span at least one decade (max >= 10 * min)");
  auto grid = t_b_sweep(spec, n_grid, {b}, replications, seed, workers);
  return fit_log_log(std::move(grid[0]));
}

std::vector<PermutationRow> permutation_cost_table(int n, double b,
                                                     const ProcessSpec& spec,
                                                     long replications,
                                                     const SeedSpec& seed,
                                                     int workers) {
  if (n < 1 || n > 6)
    throw std::invalid_argument(
        "permutation table requires 1 <= n <= 6 (n! enumeration)");
  if (!(b > 0)) throw std::invalid_argument("exponent b must be positive");
  if (replications < 100)
    throw std::invalid_argument(
        "replications must be >= 100; standard errors are meaningless below that");

  std::vector<std::vector<int>> permutations;
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    permutations.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const std::size_t np = permutations.size();

  // Slots: [0, np) mean costs, [np, 2np) paired differences vs identity.
  auto fn = [&](std::uint64_t, StreamRng& xi, StreamRng& tau, double* out) {
    double xs[6];
    double ys[6];
    double sx = 0;
    double st = 0;
    for (int k = 0; k < n; ++k) {
      sx += xi.increment(spec);
      st += tau.increment(spec);
      xs[k] = sx;
      ys[k] = st;
    }
    for (std::size_t p = 0; p < np; ++p) {
      double cost = 0;
      for (int k = 0; k < n; ++k)
        cost += abs_pow(xs[k] - ys[permutations[p][static_cast<size_t>(k)]], b);
      out[p] = cost;
      out[np + p] = cost - out[0];
    }
  };

  const auto stats = detail::replicate(replications, 2 * np, seed, workers, fn);
  const double scale = std::pow(spec.rate, -b);
  std::vector<PermutationRow> rows(np);
  for (std::size_t p = 0; p < np; ++p) {
    rows[p].permutation = permutations[p];
    rows[p].mean_cost = scale * stats[p].mean();
    rows[p].std_error = scale * stats[p].std_error();
    rows[p].margin = scale * stats[np + p].mean();
    rows[p].margin_std_error = scale * stats[np + p].std_error();
  }
  return rows;
}

}  // namespace renewal
