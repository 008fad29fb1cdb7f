#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scca/covariance.hpp"
#include "scca/errors.hpp"
#include "scca/parallel.hpp"
#include "scca/pattern.hpp"
#include "scca/solver.hpp"

namespace scca {

enum class GreedyMode { Exact, Approx };
enum class GreedyDirection { Forward, Backward };

struct GreedyConfig {
  int k_a = 1;  // target cardinality for the x side
  int k_b = 1;  // target cardinality for the y side
  GreedyMode mode = GreedyMode::Approx;
  GreedyDirection direction = GreedyDirection::Forward;
  int threads = 1;

  void validate(int n, int m) const {
    if (k_a < 1 || k_a > n)
      throw InputError("k_a must be in [1, " + std::to_string(n) + "], got " +
                       std::to_string(k_a));
    if (k_b < 1 || k_b > m)
      throw InputError("k_b must be in [1, " + std::to_string(m) + "], got " +
                       std::to_string(k_b));
    if (threads < 1) throw InputError("thread count must be at least 1");
  }
};

/// One accepted move: the variable added (forward) or removed (backward), the
/// pattern after the move, and the exact solution on that pattern.
/// bound_value is the gain bound that made the decision in approximate mode.
struct PathEntry {
  int step = 0;
  Side side = Side::X;
  int index = -1;
  SparsityPattern pattern;
  CcaSolution solution;
  std::optional<double> bound_value;
};

/// Complete record of a greedy run. The starting state is the seed pair
/// (forward) or the full pattern (backward); moves hold steps 1..T.
/// solve_count counts every full CCA solve performed during the run.
struct SparsityPath {
  GreedyDirection direction = GreedyDirection::Forward;
  SparsityPattern start_pattern;
  CcaSolution start_solution;
  std::vector<PathEntry> moves;
  long long solve_count = 0;
};

/// (total cardinality, rho) for every state along the path, starting state first.
inline std::vector<std::pair<int, double>> path_points(const SparsityPath& path) {
  std::vector<std::pair<int, double>> pts;
  pts.reserve(path.moves.size() + 1);
  pts.emplace_back(path.start_pattern.total_cardinality(), path.start_solution.rho);
  for (const auto& e : path.moves)
    pts.emplace_back(e.pattern.total_cardinality(), e.solution.rho);
  return pts;
}

namespace detail {

// Threshold below which a candidate's residual variance (Schur complement)
// counts as numerically dependent on the selected set; its bound is 0.
inline constexpr double kDegenerateTol = 1e-12;

struct CandidateEval {
  CcaSolution solution;
  std::exception_ptr error;
};

[[noreturn]] inline void rethrow_candidate_error(const std::exception_ptr& ep, Side side,
                                                 int index) {
  try {
    std::rethrow_exception(ep);
  } catch (const SolverError& e) {
    throw SolverError(std::string(side_name(side)) + " candidate " +
                      std::to_string(index) + ": " + e.what());
  }
}

inline std::vector<std::pair<Side, int>> forward_candidates(const SparsityPattern& pattern,
                                                            const GreedyConfig& config,
                                                            int n, int m) {
  std::vector<std::pair<Side, int>> moves;
  if (pattern.x_count() < config.k_a)
    for (int i = 0; i < n; ++i)
      if (!pattern.contains(Side::X, i)) moves.emplace_back(Side::X, i);
  if (pattern.y_count() < config.k_b)
    for (int j = 0; j < m; ++j)
      if (!pattern.contains(Side::Y, j)) moves.emplace_back(Side::Y, j);
  return moves;
}

/// Cholesky factor of a selected principal submatrix that grows by one
/// row/column per accepted variable, so each candidate evaluation needs only
/// two triangular solves.
class GrowingCholesky {
 public:
  void reset(const Eigen::MatrixXd& block, int capacity, const char* name) {
    const auto llt = marginal_cholesky(block, name);
    k_ = static_cast<int>(block.rows());
    L_.resize(std::max(capacity, k_), std::max(capacity, k_));
    L_.setZero();
    L_.topLeftCorner(k_, k_) = llt.matrixL();
  }

  int size() const { return k_; }

  Eigen::VectorXd forward_solve(const Eigen::VectorXd& u) const {
    return L_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solve(u);
  }

  Eigen::VectorXd back_solve(const Eigen::VectorXd& w) const {
    return L_.topLeftCorner(k_, k_)
        .triangularView<Eigen::Lower>()
        .transpose()
        .solve(w);
  }

  /// Appends one variable with cross column u and variance s. Fails (without
  /// modifying the factor) when the residual variance is degenerate.
  bool try_append(const Eigen::VectorXd& u, double s) {
    const Eigen::VectorXd w = forward_solve(u);
    const double residual = s - w.squaredNorm();
    if (residual <= kDegenerateTol || k_ >= L_.rows()) return false;
    L_.row(k_).head(k_) = w.transpose();
    L_(k_, k_) = std::sqrt(residual);
    ++k_;
    return true;
  }

 private:
  Eigen::MatrixXd L_;
  int k_ = 0;
};

/// Factor state for bound evaluation. order_x/order_y record the insertion
/// order of the pattern indices inside each factor; all per-candidate vectors
/// are assembled in that order so the quadratic forms are consistent.
struct BoundState {
  GrowingCholesky chol_x;
  GrowingCholesky chol_y;
  std::vector<int> order_x;
  std::vector<int> order_y;

  void reset(const CovarianceTriple& cov, const SparsityPattern& pattern) {
    order_x = pattern.x_indices;
    order_y = pattern.y_indices;
    chol_x.reset(cov.sigma_x(order_x, order_x), cov.x_dim(), "x");
    chol_y.reset(cov.sigma_y(order_y, order_y), cov.y_dim(), "y");
  }

  /// Grows the accepted side's factor; falls back to a fresh factorization of
  /// the new pattern when the appended variable is numerically dependent.
  void accept(const CovarianceTriple& cov, const SparsityPattern& new_pattern, Side side,
              int index) {
    const Eigen::MatrixXd& sigma = side == Side::X ? cov.sigma_x : cov.sigma_y;
    auto& order = side == Side::X ? order_x : order_y;
    auto& chol = side == Side::X ? chol_x : chol_y;
    Eigen::VectorXd u(order.size());
    for (std::size_t t = 0; t < order.size(); ++t) u[static_cast<Eigen::Index>(t)] = sigma(order[t], index);
    if (chol.try_append(u, sigma(index, index))) {
      order.push_back(index);
    } else {
      const auto& idx = side == Side::X ? new_pattern.x_indices : new_pattern.y_indices;
      order = idx;
      chol.reset(sigma(idx, idx), static_cast<int>(sigma.rows()),
                 side == Side::X ? "x" : "y");
    }
  }
};

struct BoundPick {
  Side side = Side::X;
  int index = -1;
  double bound = -1.0;
};

/// Evaluates the squared-correlation gain bound of every admissible candidate
/// and picks the largest (x side first, then smallest index, on ties).
inline BoundPick pick_bound_move(const CovarianceTriple& cov, const SparsityPattern& pattern,
                                 const CcaSolution& sol, const GreedyConfig& config,
                                 const BoundState& state) {
  const auto moves = forward_candidates(pattern, config, cov.x_dim(), cov.y_dim());
  const auto& J = pattern.y_indices;
  const auto& I = pattern.x_indices;

  // Cross-covariance images of the current optimal weights, in factor order.
  Eigen::VectorXd gx(state.order_x.size());
  for (std::size_t t = 0; t < state.order_x.size(); ++t) {
    double acc = 0.0;
    for (int j = 0; j < pattern.y_count(); ++j)
      acc += cov.sigma_xy(state.order_x[t], J[static_cast<std::size_t>(j)]) * sol.b[j];
    gx[static_cast<Eigen::Index>(t)] = acc;
  }
  Eigen::VectorXd gy(state.order_y.size());
  for (std::size_t t = 0; t < state.order_y.size(); ++t) {
    double acc = 0.0;
    for (int i = 0; i < pattern.x_count(); ++i)
      acc += cov.sigma_xy(I[static_cast<std::size_t>(i)], state.order_y[t]) * sol.a[i];
    gy[static_cast<Eigen::Index>(t)] = acc;
  }

  std::vector<double> bounds(moves.size(), 0.0);
  parallel_for(moves.size(), config.threads, [&](std::size_t c) {
    const auto [side, index] = moves[c];
    const Eigen::MatrixXd& sigma = side == Side::X ? cov.sigma_x : cov.sigma_y;
    const auto& order = side == Side::X ? state.order_x : state.order_y;
    const auto& chol = side == Side::X ? state.chol_x : state.chol_y;
    Eigen::VectorXd u(order.size());
    for (std::size_t t = 0; t < order.size(); ++t) u[static_cast<Eigen::Index>(t)] = sigma(order[t], index);
    const Eigen::VectorXd w = chol.forward_solve(u);
    const double residual = sigma(index, index) - w.squaredNorm();
    if (residual <= kDegenerateTol) return;  // dependent candidate, bound stays 0
    const Eigen::VectorXd z = chol.back_solve(w);
    double cross = 0.0;
    if (side == Side::X) {
      for (int j = 0; j < pattern.y_count(); ++j)
        cross += cov.sigma_xy(index, J[static_cast<std::size_t>(j)]) * sol.b[j];
      const double num = gx.dot(z) - cross;
      bounds[c] = num * num / residual;
    } else {
      for (int i = 0; i < pattern.x_count(); ++i)
        cross += cov.sigma_xy(I[static_cast<std::size_t>(i)], index) * sol.a[i];
      const double num = gy.dot(z) - cross;
      bounds[c] = num * num / residual;
    }
  });

  BoundPick pick;
  for (std::size_t c = 0; c < moves.size(); ++c) {
    if (bounds[c] > pick.bound) {
      pick.side = moves[c].first;
      pick.index = moves[c].second;
      pick.bound = bounds[c];
    }
  }
  return pick;
}

}  // namespace detail

/// Best single-variable pair: maximizes |sigma_xy(i,j)| / sqrt(sigma_x(i,i) *
/// sigma_y(j,j)) over all (i, j), ties to the smallest i then smallest j.
/// Zero-variance pairs follow the 0/0 = 1 convention.
inline std::pair<SparsityPattern, CcaSolution> seed_pair(const CovarianceTriple& cov,
                                                         long long* solve_counter = nullptr) {
  const int n = cov.x_dim(), m = cov.y_dim();
  double best = -1.0;
  int best_i = -1, best_j = -1;
  bool best_degenerate = false;
  for (int i = 0; i < n; ++i) {
    const double dx = cov.sigma_x(i, i);
    for (int j = 0; j < m; ++j) {
      const double dy = cov.sigma_y(j, j);
      const double num = std::abs(cov.sigma_xy(i, j));
      double value;
      bool degenerate = false;
      if (dx > 0.0 && dy > 0.0) {
        value = num / (std::sqrt(dx) * std::sqrt(dy));
      } else if (num == 0.0) {
        value = 1.0;
        degenerate = true;
      } else {
        throw SolverError("zero variance with nonzero cross covariance at (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (value > best) {
        best = value;
        best_i = i;
        best_j = j;
        best_degenerate = degenerate;
      }
    }
  }
  SparsityPattern pattern({best_i}, {best_j});
  CcaSolution sol;
  if (best_degenerate) {
    // Unnormalizable 1x1 model; the correlation is 1 by convention.
    sol.rho = 1.0;
    sol.a = Eigen::VectorXd::Ones(1);
    sol.b = Eigen::VectorXd::Ones(1);
    sol.pattern = pattern;
  } else {
    sol = solve_cca(cov, pattern);
    if (solve_counter) ++*solve_counter;
  }
  return {std::move(pattern), std::move(sol)};
}

/// Lower bound on the increase of the squared correlation when x-variable
/// `i` joins the pattern, computed from the current optimal solution without
/// a new eigensolve: the squared residual of regressing the candidate's
/// cross-covariance row on the selected set, divided by the candidate's
/// residual variance. Degenerate candidates (residual variance <= 1e-12)
/// report 0.
inline double gain_bound_x(const CovarianceTriple& cov, const SparsityPattern& pattern,
                           const CcaSolution& sol, int i) {
  pattern.validate(cov.x_dim(), cov.y_dim());
  if (pattern.x_count() < 1 || pattern.y_count() < 1)
    throw InputError("pattern must be nonempty on both sides");
  if (i < 0 || i >= cov.x_dim() || pattern.contains(Side::X, i))
    throw InputError("candidate x index " + std::to_string(i) +
                     " must be outside the pattern and in range");
  if (sol.pattern != pattern)
    throw InputError("solution does not belong to the given pattern");
  const auto& I = pattern.x_indices;
  const auto& J = pattern.y_indices;
  const auto llt = detail::marginal_cholesky(cov.sigma_x(I, I), "x");
  Eigen::VectorXd u(I.size());
  for (std::size_t t = 0; t < I.size(); ++t) u[static_cast<Eigen::Index>(t)] = cov.sigma_x(I[t], i);
  const Eigen::VectorXd z = llt.solve(u);
  const double residual = cov.sigma_x(i, i) - u.dot(z);
  if (residual <= detail::kDegenerateTol) return 0.0;
  const Eigen::VectorXd g = cov.sigma_xy(I, J) * sol.b;
  double cross = 0.0;
  for (int j = 0; j < pattern.y_count(); ++j)
    cross += cov.sigma_xy(i, J[static_cast<std::size_t>(j)]) * sol.b[j];
  const double num = g.dot(z) - cross;
  return num * num / residual;
}

/// Mirror image of gain_bound_x for adding y-variable `j`.
inline double gain_bound_y(const CovarianceTriple& cov, const SparsityPattern& pattern,
                           const CcaSolution& sol, int j) {
  pattern.validate(cov.x_dim(), cov.y_dim());
  if (pattern.x_count() < 1 || pattern.y_count() < 1)
    throw InputError("pattern must be nonempty on both sides");
  if (j < 0 || j >= cov.y_dim() || pattern.contains(Side::Y, j))
    throw InputError("candidate y index " + std::to_string(j) +
                     " must be outside the pattern and in range");
  if (sol.pattern != pattern)
    throw InputError("solution does not belong to the given pattern");
  const auto& I = pattern.x_indices;
  const auto& J = pattern.y_indices;
  const auto llt = detail::marginal_cholesky(cov.sigma_y(J, J), "y");
  Eigen::VectorXd u(J.size());
  for (std::size_t t = 0; t < J.size(); ++t) u[static_cast<Eigen::Index>(t)] = cov.sigma_y(J[t], j);
  const Eigen::VectorXd z = llt.solve(u);
  const double residual = cov.sigma_y(j, j) - u.dot(z);
  if (residual <= detail::kDegenerateTol) return 0.0;
  const Eigen::VectorXd g = cov.sigma_xy(I, J).transpose() * sol.a;
  double cross = 0.0;
  for (int i = 0; i < pattern.x_count(); ++i)
    cross += cov.sigma_xy(I[static_cast<std::size_t>(i)], j) * sol.a[i];
  const double num = g.dot(z) - cross;
  return num * num / residual;
}

/// Solves one exact CCA per remaining candidate on each side still below its
/// target and returns the move with the largest correlation. Ties prefer the
/// x side, then the smallest index.
inline PathEntry forward_step_exact(const CovarianceTriple& cov,
                                    const SparsityPattern& pattern,
                                    const GreedyConfig& config,
                                    long long* solve_counter = nullptr) {
  config.validate(cov.x_dim(), cov.y_dim());
  pattern.validate(cov.x_dim(), cov.y_dim());
  if (pattern.x_count() < 1 || pattern.y_count() < 1)
    throw InputError("pattern must be nonempty on both sides");
  const auto moves = detail::forward_candidates(pattern, config, cov.x_dim(), cov.y_dim());
  if (moves.empty())
    throw InputError("pattern is already at the target cardinalities; no forward step");

  std::vector<detail::CandidateEval> evals(moves.size());
  parallel_for(moves.size(), config.threads, [&](std::size_t c) {
    try {
      evals[c].solution = solve_cca(cov, pattern.with(moves[c].first, moves[c].second));
    } catch (...) {
      evals[c].error = std::current_exception();
    }
  });
  if (solve_counter) *solve_counter += static_cast<long long>(moves.size());

  std::size_t best = moves.size();
  double best_rho = -1.0;
  for (std::size_t c = 0; c < moves.size(); ++c) {
    if (evals[c].error)
      detail::rethrow_candidate_error(evals[c].error, moves[c].first, moves[c].second);
    if (evals[c].solution.rho > best_rho) {
      best_rho = evals[c].solution.rho;
      best = c;
    }
  }
  PathEntry entry;
  entry.side = moves[best].first;
  entry.index = moves[best].second;
  entry.solution = std::move(evals[best].solution);
  entry.pattern = entry.solution.pattern;
  return entry;
}

/// Picks the candidate with the largest gain bound, then solves exactly one
/// CCA on the extended pattern. When every candidate's bound is zero within
/// tolerance the bounds carry no ordering information and one exact step is
/// taken instead (its entry has no bound_value).
inline PathEntry forward_step_approx(const CovarianceTriple& cov,
                                     const SparsityPattern& pattern,
                                     const CcaSolution& sol, const GreedyConfig& config,
                                     long long* solve_counter = nullptr) {
  config.validate(cov.x_dim(), cov.y_dim());
  pattern.validate(cov.x_dim(), cov.y_dim());
  if (pattern.x_count() < 1 || pattern.y_count() < 1)
    throw InputError("pattern must be nonempty on both sides");
  if (sol.pattern != pattern)
    throw InputError("solution does not belong to the given pattern");
  if (detail::forward_candidates(pattern, config, cov.x_dim(), cov.y_dim()).empty())
    throw InputError("pattern is already at the target cardinalities; no forward step");

  detail::BoundState state;
  state.reset(cov, pattern);
  const detail::BoundPick pick = detail::pick_bound_move(cov, pattern, sol, config, state);
  if (pick.bound <= detail::kDegenerateTol)
    return forward_step_exact(cov, pattern, config, solve_counter);

  PathEntry entry;
  entry.side = pick.side;
  entry.index = pick.index;
  entry.pattern = pattern.with(pick.side, pick.index);
  entry.solution = solve_cca(cov, entry.pattern);
  if (solve_counter) ++*solve_counter;
  entry.bound_value = pick.bound;
  return entry;
}

/// Starts from the full pattern and repeatedly removes the variable whose
/// removal keeps the largest exact correlation, until both sides reach their
/// targets. Ties prefer the x side, then the largest index.
inline SparsityPath backward_greedy(const CovarianceTriple& cov, const GreedyConfig& config) {
  const int n = cov.x_dim(), m = cov.y_dim();
  config.validate(n, m);

  SparsityPath path;
  path.direction = GreedyDirection::Backward;
  path.start_pattern = SparsityPattern::full(n, m);
  path.start_solution = solve_cca(cov);
  ++path.solve_count;

  SparsityPattern pattern = path.start_pattern;
  int step = 0;
  while (pattern.x_count() > config.k_a || pattern.y_count() > config.k_b) {
    std::vector<std::pair<Side, int>> moves;
    if (pattern.x_count() > config.k_a)
      for (auto it = pattern.x_indices.rbegin(); it != pattern.x_indices.rend(); ++it)
        moves.emplace_back(Side::X, *it);
    if (pattern.y_count() > config.k_b)
      for (auto it = pattern.y_indices.rbegin(); it != pattern.y_indices.rend(); ++it)
        moves.emplace_back(Side::Y, *it);

    std::vector<detail::CandidateEval> evals(moves.size());
    parallel_for(moves.size(), config.threads, [&](std::size_t c) {
      try {
        evals[c].solution = solve_cca(cov, pattern.without(moves[c].first, moves[c].second));
      } catch (...) {
        evals[c].error = std::current_exception();
      }
    });
    path.solve_count += static_cast<long long>(moves.size());

    std::size_t best = moves.size();
    double best_rho = -1.0;
    for (std::size_t c = 0; c < moves.size(); ++c) {
      if (evals[c].error)
        detail::rethrow_candidate_error(evals[c].error, moves[c].first, moves[c].second);
      if (evals[c].solution.rho > best_rho) {
        best_rho = evals[c].solution.rho;
        best = c;
      }
    }
    PathEntry entry;
    entry.step = ++step;
    entry.side = moves[best].first;
    entry.index = moves[best].second;
    entry.solution = std::move(evals[best].solution);
    entry.pattern = entry.solution.pattern;
    pattern = entry.pattern;
    path.moves.push_back(std::move(entry));
  }
  return path;
}

/// Runs the configured greedy selection and returns the complete path.
/// Forward runs seed the best single pair and add one variable per step until
/// both cardinality targets are met; backward removes from the full pattern.
inline SparsityPath run_greedy(const CovarianceTriple& cov, const GreedyConfig& config) {
  const int n = cov.x_dim(), m = cov.y_dim();
  config.validate(n, m);

  if (config.direction == GreedyDirection::Backward) {
    if (config.mode == GreedyMode::Approx)
      throw InputError("approximate backward selection is not supported; use exact mode");
    return backward_greedy(cov, config);
  }

  SparsityPath path;
  path.direction = GreedyDirection::Forward;
  auto [pattern, sol] = seed_pair(cov, &path.solve_count);
  path.start_pattern = pattern;
  path.start_solution = sol;

  detail::BoundState state;
  const bool approx = config.mode == GreedyMode::Approx;
  if (approx) state.reset(cov, pattern);

  int step = 0;
  while (pattern.x_count() < config.k_a || pattern.y_count() < config.k_b) {
    PathEntry entry;
    if (approx) {
      const detail::BoundPick pick = detail::pick_bound_move(cov, pattern, sol, config, state);
      if (pick.bound <= detail::kDegenerateTol) {
        entry = forward_step_exact(cov, pattern, config, &path.solve_count);
      } else {
        entry.side = pick.side;
        entry.index = pick.index;
        entry.pattern = pattern.with(pick.side, pick.index);
        entry.solution = solve_cca(cov, entry.pattern);
        ++path.solve_count;
        entry.bound_value = pick.bound;
      }
      state.accept(cov, entry.pattern, entry.side, entry.index);
    } else {
      entry = forward_step_exact(cov, pattern, config, &path.solve_count);
    }
    entry.step = ++step;
    pattern = entry.pattern;
    sol = entry.solution;
    path.moves.push_back(std::move(entry));
  }
  return path;
}

}  // namespace scca
