#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scca/covariance.hpp"
#include "scca/errors.hpp"
#include "scca/greedy.hpp"
#include "scca/oracle.hpp"
#include "scca/parallel.hpp"
#include "scca/random.hpp"
#include "scca/solver.hpp"

namespace scca {

/// Marginal-covariance treatment applied before selection: plain correlation
/// (cca), identity marginals maximizing covariance (pls), or variance-only
/// diagonal marginals (dcca).
enum class Method { Cca, Pls, Dcca };

enum class PathMode { ForwardApprox, ForwardExact, Backward, Oracle };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Cca: return "cca";
    case Method::Pls: return "pls";
    default: return "dcca";
  }
}

inline const char* mode_name(PathMode m) {
  switch (m) {
    case PathMode::ForwardApprox: return "forward-approx";
    case PathMode::ForwardExact: return "forward-exact";
    case PathMode::Backward: return "backward";
    default: return "oracle";
  }
}

struct ExperimentConfig {
  int n = 7;
  int m = 7;
  int trials = 1;
  std::uint64_t seed = 0;
  int dof = 14;
  int samples = 0;  // draws per trial; used by the regularization study only
  std::vector<Method> methods = {Method::Cca};
  std::vector<PathMode> modes = {PathMode::ForwardApprox};
  long long budget = kDefaultPatternBudget;
  int threads = 1;

  void validate_common() const {
    if (n < 1 || m < 1) throw InputError("dimensions must be positive");
    if (trials < 1) throw InputError("trial count must be at least 1");
    if (threads < 1) throw InputError("thread count must be at least 1");
    if (dof < n + m)
      throw InputError("degrees of freedom (" + std::to_string(dof) +
                       ") must be at least n + m = " + std::to_string(n + m));
  }
};

/// One aggregated cell: mean/std of the correlation metric at one total
/// cardinality for one (method, mode) pair, with the number of trials that
/// actually reached that cardinality.
struct CurveRow {
  int total_cardinality = 0;
  Method method = Method::Cca;
  PathMode mode = PathMode::ForwardApprox;
  double mean_rho = 0.0;
  double std_rho = 0.0;
  int trials = 0;
};

struct CurveTable {
  std::vector<CurveRow> rows;
};

namespace detail {

inline CovarianceTriple apply_method(const CovarianceTriple& cov, Method method) {
  switch (method) {
    case Method::Cca: return cov;
    case Method::Pls: return identity_marginals(cov);
    default: return diagonalize_marginals(cov);
  }
}

struct CellAccumulator {
  long long count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    ++count;
    sum += v;
    sum_sq += v * v;
  }
  double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
  double stddev() const {
    if (count < 2) return 0.0;
    const double mu = mean();
    const double var =
        std::max(0.0, (sum_sq - static_cast<double>(count) * mu * mu) /
                          static_cast<double>(count - 1));
    return std::sqrt(var);
  }
};

[[noreturn]] inline void rethrow_trial_error(const std::exception_ptr& ep, int trial) {
  try {
    std::rethrow_exception(ep);
  } catch (const SolverError& e) {
    throw SolverError("trial " + std::to_string(trial) + ": " + e.what());
  } catch (const BudgetError&) {
    throw;  // independent of the trial; keep the pattern count intact
  }
}

/// Correlation per total cardinality (index 0 <-> cardinality 2) for one mode
/// run to its extreme targets, so every cardinality in [2, n + m] is covered.
inline std::vector<double> mode_curve(const CovarianceTriple& cov, PathMode mode,
                                      long long budget) {
  const int n = cov.x_dim(), m = cov.y_dim();
  std::vector<double> curve(static_cast<std::size_t>(n + m - 1), 0.0);
  if (mode == PathMode::Oracle) {
    const auto points = oracle_curve(cov, n + m, budget, 1);
    for (const auto& p : points)
      curve[static_cast<std::size_t>(p.k_a + p.k_b - 2)] = p.rho;
    return curve;
  }
  GreedyConfig gc;
  if (mode == PathMode::Backward) {
    gc.k_a = 1;
    gc.k_b = 1;
    gc.mode = GreedyMode::Exact;
    gc.direction = GreedyDirection::Backward;
  } else {
    gc.k_a = n;
    gc.k_b = m;
    gc.mode = mode == PathMode::ForwardExact ? GreedyMode::Exact : GreedyMode::Approx;
    gc.direction = GreedyDirection::Forward;
  }
  for (const auto& [card, rho] : path_points(run_greedy(cov, gc)))
    curve[static_cast<std::size_t>(card - 2)] = rho;
  return curve;
}

/// Full forward-approx path on `model`, scoring every state against
/// `true_cov`. A solver failure along the path keeps the successful prefix
/// (index 0 <-> cardinality 2).
inline std::vector<double> forward_approx_true_scores(const CovarianceTriple& model,
                                                      const CovarianceTriple& true_cov) {
  const int n = model.x_dim(), m = model.y_dim();
  GreedyConfig gc;
  gc.k_a = n;
  gc.k_b = m;
  gc.mode = GreedyMode::Approx;
  gc.direction = GreedyDirection::Forward;
  std::vector<double> scores;
  try {
    auto [pattern, sol] = seed_pair(model);
    scores.push_back(true_correlation(true_cov, sol));
    while (pattern.x_count() < n || pattern.y_count() < m) {
      PathEntry entry = forward_step_approx(model, pattern, sol, gc);
      pattern = entry.pattern;
      sol = entry.solution;
      scores.push_back(true_correlation(true_cov, sol));
    }
  } catch (const SolverError&) {
    // singular sample marginal mid-path; the prefix stands
  }
  return scores;
}

}  // namespace detail

/// Draws one random model per trial, runs every requested selection mode over
/// the full cardinality range, and averages the correlation per (mode, total
/// cardinality). Deterministic for a fixed config; any failed trial aborts the
/// experiment.
inline CurveTable sparsity_tradeoff_experiment(const ExperimentConfig& config) {
  config.validate_common();
  if (config.modes.empty()) throw InputError("at least one selection mode is required");
  const int cards = config.n + config.m - 1;

  std::vector<std::vector<std::vector<double>>> per_trial(
      static_cast<std::size_t>(config.trials));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(config.trials));
  parallel_for(static_cast<std::size_t>(config.trials), config.threads, [&](std::size_t t) {
    try {
      const CovarianceTriple cov =
          wishart_triple(derive_seed(config.seed, t), config.n, config.m, config.dof);
      auto& curves = per_trial[t];
      curves.reserve(config.modes.size());
      for (PathMode mode : config.modes)
        curves.push_back(detail::mode_curve(cov, mode, config.budget));
    } catch (...) {
      failures[t] = std::current_exception();
    }
  });
  for (int t = 0; t < config.trials; ++t)
    if (failures[static_cast<std::size_t>(t)])
      detail::rethrow_trial_error(failures[static_cast<std::size_t>(t)], t);

  CurveTable table;
  for (std::size_t mi = 0; mi < config.modes.size(); ++mi) {
    for (int c = 0; c < cards; ++c) {
      detail::CellAccumulator acc;
      for (int t = 0; t < config.trials; ++t)
        acc.add(per_trial[static_cast<std::size_t>(t)][mi][static_cast<std::size_t>(c)]);
      table.rows.push_back({c + 2, Method::Cca, config.modes[mi], acc.mean(), acc.stddev(),
                            static_cast<int>(acc.count)});
    }
  }
  return table;
}

/// Single-instance forward-approx path at (n, m); reports rho divided by the
/// full-pattern rho per total cardinality, so the curve ends at exactly 1.
inline CurveTable large_scale_path(const ExperimentConfig& config) {
  config.validate_common();
  const CovarianceTriple cov =
      wishart_triple(derive_seed(config.seed, 0), config.n, config.m, config.dof);
  GreedyConfig gc;
  gc.k_a = config.n;
  gc.k_b = config.m;
  gc.mode = GreedyMode::Approx;
  gc.direction = GreedyDirection::Forward;
  gc.threads = config.threads;
  const auto points = path_points(run_greedy(cov, gc));
  const double rho_full = points.back().second;
  if (rho_full <= 0.0)
    throw SolverError("full-pattern correlation is zero; the ratio curve is undefined");
  CurveTable table;
  for (const auto& [card, rho] : points)
    table.rows.push_back(
        {card, Method::Cca, PathMode::ForwardApprox, rho / rho_full, 0.0, 1});
  return table;
}

/// Regularization study: one fixed "true" model, per trial a fresh N-sample
/// estimate; each method's transform is applied to the estimate, a full
/// forward-approx path is run on it, and every path state is scored by its
/// correlation under the true model. Cells report how many trials reached
/// them; a trial whose path fails midway contributes its prefix only.
inline CurveTable regularization_experiment(const ExperimentConfig& config) {
  config.validate_common();
  if (config.methods.empty()) throw InputError("at least one method is required");
  if (config.samples < 2)
    throw InputError("the regularization study needs at least 2 samples per trial");

  const CovarianceTriple true_cov =
      wishart_triple(derive_seed(config.seed, 0), config.n, config.m, config.dof);
  const JointGaussianSampler sampler(true_cov);

  std::vector<std::vector<std::vector<double>>> per_trial(
      static_cast<std::size_t>(config.trials));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(config.trials));
  parallel_for(static_cast<std::size_t>(config.trials), config.threads, [&](std::size_t t) {
    try {
      const DataSet data = sampler.draw(derive_seed(config.seed, t + 1), config.samples);
      const CovarianceTriple est = estimate_covariance(data, false);
      auto& curves = per_trial[t];
      curves.reserve(config.methods.size());
      for (Method method : config.methods)
        curves.push_back(
            detail::forward_approx_true_scores(detail::apply_method(est, method), true_cov));
    } catch (...) {
      failures[t] = std::current_exception();
    }
  });
  for (int t = 0; t < config.trials; ++t)
    if (failures[static_cast<std::size_t>(t)])
      detail::rethrow_trial_error(failures[static_cast<std::size_t>(t)], t);

  CurveTable table;
  const int cards = config.n + config.m - 1;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    for (int c = 0; c < cards; ++c) {
      detail::CellAccumulator acc;
      for (int t = 0; t < config.trials; ++t) {
        const auto& scores = per_trial[static_cast<std::size_t>(t)][mi];
        if (static_cast<std::size_t>(c) < scores.size())
          acc.add(scores[static_cast<std::size_t>(c)]);
      }
      if (acc.count == 0) continue;  // no trial reached this cardinality
      table.rows.push_back({c + 2, config.methods[mi], PathMode::ForwardApprox, acc.mean(),
                            acc.stddev(), static_cast<int>(acc.count)});
    }
  }
  return table;
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

/// Short stable tag identifying an experiment configuration, embedded in
/// output filenames. Thread count is excluded: it never changes results.
inline std::string config_tag(std::string_view kind, const ExperimentConfig& c) {
  std::string text(kind);
  text += "|n=" + std::to_string(c.n) + "|m=" + std::to_string(c.m) +
          "|trials=" + std::to_string(c.trials) + "|seed=" + std::to_string(c.seed) +
          "|dof=" + std::to_string(c.dof) + "|samples=" + std::to_string(c.samples) +
          "|budget=" + std::to_string(c.budget) + "|methods=";
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    if (i) text += ",";
    text += method_name(c.methods[i]);
  }
  text += "|modes=";
  for (std::size_t i = 0; i < c.modes.size(); ++i) {
    if (i) text += ",";
    text += mode_name(c.modes[i]);
  }
  const std::uint64_t h = fnv1a64(text);
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[15 - i] = digits[(h >> (4 * i)) & 0xF];
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace scca
