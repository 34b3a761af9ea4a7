#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "renewal/rational.hpp"

namespace renewal {

// Largest exponent the exact engine accepts without an explicit opt-in.
// Partition counts stay tiny through a = 16 (p(8) = 22) and every factorial
// involved is cheap; anything larger must be requested deliberately.
inline constexpr int kDefaultMaxExponent = 16;

// Thrown when an operation needs moments beyond what a profile stores.
class OrderInsufficientError : public std::runtime_error {
 public:
  OrderInsufficientError(int required, int stored);
  int required_order() const { return required_; }
  int stored_order() const { return stored_; }

 private:
  int required_;
  int stored_;
};

// Raw moments m_0..m_c of one increment, normalized to mean 1.
//
// Stores exact rationals throughout. Families with rational moments mark the
// profile exact; otherwise the rationals are exact images of high-precision
// floating evaluations and the profile is marked approximate.
class MomentProfile {
 public:
  // moments[p] = E[xi^p]; requires m_0 = 1, m_1 = 1, m_p > 1 for p >= 2,
  // and order = moments.size() - 1 even and >= 2.
  MomentProfile(std::vector<Rational> moments, bool exact, std::string label);

  int order() const { return static_cast<int>(moments_.size()) - 1; }
  const Rational& moment(int p) const;  // throws OrderInsufficientError
  Rational variance() const { return moments_[2] - 1; }
  bool exact() const { return exact_; }
  const std::string& label() const { return label_; }

  // Accepted but flagged: variance below 1e-9 makes the leading term
  // numerically fragile next to the remainder at desk-scale k.
  bool ill_conditioned() const;

  // max_{p <= a} m_p, the moment bound entering the shift-gap inequality.
  Rational moment_bound(int a) const;

 private:
  std::vector<Rational> moments_;
  bool exact_;
  std::string label_;
};

// One grouped term of the even-composition sum: the compositions sharing the
// part multiset {2*d_1, ..., 2*d_m} collapsed into a single product.
struct PartitionTerm {
  std::vector<int> parts;    // d_1 >= d_2 >= ... >= d_m, sum = a/2
  Integer multiplicity;      // number of compositions realizing this multiset
  Rational coefficient;      // a! / prod (2*d_j)!
};

struct ExactMomentResult {
  Rational value;         // E[(lambda X_k - lambda Y_k)^a], rate factored out
  Rational leading_term;  // a! * variance^{a/2} / (a/2)! * k^{a/2}
  Rational remainder;     // value - leading_term
  int a = 0;
  long k = 0;

  // Rate enters only here, as a final division by lambda^a.
  struct AtRate {
    double value;
    double leading_term;
    double remainder;
  };
  AtRate at_rate(double lambda) const;
};

// E[(xi - tau)^d] for two i.i.d. copies, via the binomial expansion
// sum_j C(d,j) m_j (-1)^{d-j} m_{d-j}. Exactly zero for every odd d;
// 2 * variance for d = 2.
Rational central_diff_moment(int d, const MomentProfile& profile);

// One term per integer partition of a/2 with at most min(k, a/2) parts.
std::vector<PartitionTerm> enumerate_partition_terms(int a, long k,
                                                     bool allow_large_a = false);

// Exact E[(lambda X_k - lambda Y_k)^a] as the sum over partition terms of
// coefficient * multiplicity * prod_j central_diff_moment(2 d_j).
ExactMomentResult exact_pair_moment(int a, long k, const MomentProfile& profile,
                                    bool allow_large_a = false);

// (k, |remainder| / k^{a/2-1}) over the grid; the caller asserts boundedness.
// Requires a strictly increasing grid with every k > a/2.
std::vector<std::pair<long, double>> remainder_ratio_scan(
    int a, const std::vector<long>& k_grid, const MomentProfile& profile,
    bool allow_large_a = false);

}  // namespace renewal
