#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scca/covariance.hpp"
#include "scca/errors.hpp"
#include "scca/parallel.hpp"
#include "scca/solver.hpp"

namespace scca {

inline constexpr long long kDefaultPatternBudget = 2'000'000;

/// C(n, k), saturating at LLONG_MAX.
inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long result = 1;
  for (int t = 0; t < k; ++t) {
    const long long num = n - t;
    if (result > std::numeric_limits<long long>::max() / num)
      return std::numeric_limits<long long>::max();
    result = result * num / (t + 1);  // exact: result * (n-t) is divisible by (t+1)
  }
  return result;
}

/// Number of (|I|, |J|) = (k_a, k_b) patterns, saturating at LLONG_MAX.
inline long long pattern_count(int n, int m, int k_a, int k_b) {
  const long long cx = binomial(n, k_a);
  const long long cy = binomial(m, k_b);
  if (cx != 0 && cy > std::numeric_limits<long long>::max() / cx)
    return std::numeric_limits<long long>::max();
  return cx * cy;
}

namespace detail {

/// k-combination of {0..n-1} at lexicographic `rank`.
inline std::vector<int> combination_at(int n, int k, long long rank) {
  std::vector<int> combo(static_cast<std::size_t>(k));
  int value = 0;
  for (int slot = 0; slot < k; ++slot) {
    for (;; ++value) {
      const long long tail = binomial(n - value - 1, k - slot - 1);
      if (rank < tail) break;
      rank -= tail;
    }
    combo[static_cast<std::size_t>(slot)] = value++;
  }
  return combo;
}

/// Advances to the lexicographic successor; false at the last combination.
inline bool next_combination(std::vector<int>& combo, int n) {
  const int k = static_cast<int>(combo.size());
  for (int i = k - 1; i >= 0; --i) {
    if (combo[static_cast<std::size_t>(i)] < n - k + i) {
      int v = ++combo[static_cast<std::size_t>(i)];
      for (int t = i + 1; t < k; ++t) combo[static_cast<std::size_t>(t)] = ++v;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Reference solver: solves every pattern with |I| = k_a, |J| = k_b and
/// returns the best, ties broken lexicographically on (I, J). Refuses with a
/// BudgetError when the pattern count exceeds `budget`.
inline CcaSolution exhaustive_sparse_cca(const CovarianceTriple& cov, int k_a, int k_b,
                                         long long budget = kDefaultPatternBudget,
                                         int threads = 1) {
  const int n = cov.x_dim(), m = cov.y_dim();
  if (k_a < 1 || k_a > n || k_b < 1 || k_b > m)
    throw InputError("cardinalities must satisfy 1 <= k_a <= n and 1 <= k_b <= m");
  const long long count = pattern_count(n, m, k_a, k_b);
  if (count > budget)
    throw BudgetError("exhaustive search over " + std::to_string(count) +
                          " patterns exceeds the budget of " + std::to_string(budget),
                      count);

  const long long x_combos = binomial(n, k_a);
  const int workers = static_cast<int>(std::min<long long>(std::max(threads, 1), x_combos));
  const long long chunk = (x_combos + workers - 1) / workers;

  struct BlockResult {
    CcaSolution best;
    double best_rho = -1.0;
    long long error_rank = std::numeric_limits<long long>::max();
    std::exception_ptr error;
  };
  std::vector<BlockResult> blocks(static_cast<std::size_t>(workers));

  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    BlockResult& block = blocks[w];
    const long long begin = static_cast<long long>(w) * chunk;
    const long long end = std::min(begin + chunk, x_combos);
    if (begin >= end) return;
    std::vector<int> xi = detail::combination_at(n, k_a, begin);
    for (long long rank = begin; rank < end; ++rank) {
      std::vector<int> yj(static_cast<std::size_t>(k_b));
      for (int t = 0; t < k_b; ++t) yj[static_cast<std::size_t>(t)] = t;
      do {
        try {
          CcaSolution sol = solve_cca(cov, SparsityPattern(xi, yj));
          if (sol.rho > block.best_rho) {
            block.best_rho = sol.rho;
            block.best = std::move(sol);
          }
        } catch (...) {
          if (rank < block.error_rank) {
            block.error_rank = rank;
            block.error = std::current_exception();
          }
          return;
        }
      } while (detail::next_combination(yj, m));
      detail::next_combination(xi, n);
    }
  });

  // Deterministic reduction in block order keeps the lexicographic tie-break.
  for (const auto& block : blocks)
    if (block.error) std::rethrow_exception(block.error);
  const BlockResult* best = nullptr;
  for (const auto& block : blocks) {
    if (block.best_rho < 0) continue;
    if (!best || block.best_rho > best->best_rho) best = &block;
  }
  return best->best;
}

struct OracleCurvePoint {
  int k_a = 0;
  int k_b = 0;
  double rho = 0.0;
};

/// Best correlation per total cardinality t = k_a + k_b over all splits with
/// k_a, k_b >= 1, for t from 2 to max_total_cardinality.
inline std::vector<OracleCurvePoint> oracle_curve(const CovarianceTriple& cov,
                                                  int max_total_cardinality,
                                                  long long budget = kDefaultPatternBudget,
                                                  int threads = 1) {
  const int n = cov.x_dim(), m = cov.y_dim();
  const int top = std::min(max_total_cardinality, n + m);
  std::vector<OracleCurvePoint> curve;
  for (int t = 2; t <= top; ++t) {
    OracleCurvePoint point;
    double best = -1.0;
    for (int k_a = std::max(1, t - m); k_a <= std::min(n, t - 1); ++k_a) {
      const int k_b = t - k_a;
      const CcaSolution sol = exhaustive_sparse_cca(cov, k_a, k_b, budget, threads);
      if (sol.rho > best) {
        best = sol.rho;
        point = {k_a, k_b, sol.rho};
      }
    }
    curve.push_back(point);
  }
  return curve;
}

}  // namespace scca
