#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace renewal {

struct VerifyOptions {
  long replications = 100000;
  std::uint64_t master_seed = 42;
  int workers = 1;
};

struct CheckResult {
  std::string name;
  std::string band;    // the tolerance the check enforces
  std::string status;  // pass | fail | skipped
  // Key/value pairs, already formatted; deterministic order and content.
  std::vector<std::pair<std::string, std::string>> details;
};

// Runs the full verification suite: exact-engine equivalence against a
// brute-force composition enumeration, the exponential closed form, Monte
// Carlo against the exact engine, the shift-gap bound, moment and
// transportation-cost scaling slopes, matching optimality, the Jensen moment
// chain, rate scaling, remainder growth and determinism. Checks whose bands
// would be meaningless at low replication counts report "skipped".
std::vector<CheckResult> run_verify(const VerifyOptions& options);

inline bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results)
    if (r.status == "fail") return false;
  return true;
}

}  // namespace renewal
