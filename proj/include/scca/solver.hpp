#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>

#include "scca/covariance.hpp"
#include "scca/errors.hpp"
#include "scca/pattern.hpp"

namespace scca {

/// Canonical weight pair for one sparsity pattern. `a` and `b` are indexed in
/// pattern order; `pattern` maps them back to full-space coordinates. Weights
/// are normalized to unit variance under the restricted marginals (when those
/// are nonsingular) and the first nonzero entry of `a` is positive.
struct CcaSolution {
  double rho = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  SparsityPattern pattern;
};

namespace detail {

/// Cholesky of a marginal block. A failed factorization is retried once with a
/// diagonal jitter of 1e-10 * trace/dim; a second failure is a SolverError
/// naming the block.
inline Eigen::LLT<Eigen::MatrixXd> marginal_cholesky(const Eigen::MatrixXd& block,
                                                     const char* block_name) {
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * block.trace() / static_cast<double>(block.rows());
  if (jitter > 0.0) {
    Eigen::MatrixXd shifted = block;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw SolverError(std::string(block_name) +
                    " marginal covariance is numerically singular");
}

/// Flips the pair's sign so the first entry of `a` larger than 1e-12 in
/// magnitude is positive. Eigenvector signs are otherwise arbitrary.
inline void canonicalize_sign(Eigen::VectorXd& a, Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a[i]) > 1e-12) {
      if (a[i] < 0) {
        a = -a;
        b = -b;
      }
      return;
    }
  }
}

// For a jointly PSD model the value cannot exceed 1; anything in (1, 1+1e-10]
// is round-off and is clamped. Larger values are genuine and pass through:
// they arise from models that are not correlation models, e.g. the
// identity-marginal (covariance-maximizing) transform, where the value is the
// top singular value of the cross block.
inline double clamp_rho(double rho) {
  if (rho > 1.0 && rho <= 1.0 + 1e-10) return 1.0;
  if (rho < 0.0) return 0.0;  // unreachable for singular values
  return rho;
}

}  // namespace detail

/// Maximal correlation of linear combinations a^T x and b^T y under the given
/// model. Computed by a symmetric-definite reduction: with Cholesky factors
/// Lx Lx^T = sigma_x and Ly Ly^T = sigma_y, rho is the top singular value of
/// Lx^{-1} sigma_xy Ly^{-T} and the weights are the back-transformed singular
/// vectors. A rank-deficient joint matrix over invertible marginals yields
/// rho = 1.
inline CcaSolution solve_cca(const CovarianceTriple& cov) {
  const auto llt_x = detail::marginal_cholesky(cov.sigma_x, "x");
  const auto llt_y = detail::marginal_cholesky(cov.sigma_y, "y");

  Eigen::MatrixXd whitened = llt_x.matrixL().solve(cov.sigma_xy);
  whitened = llt_y.matrixL().solve(whitened.transpose()).transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);

  CcaSolution sol;
  sol.rho = detail::clamp_rho(svd.singularValues()(0));
  sol.a = llt_x.matrixU().solve(svd.matrixU().col(0));
  sol.b = llt_y.matrixU().solve(svd.matrixV().col(0));
  detail::canonicalize_sign(sol.a, sol.b);
  sol.pattern = SparsityPattern::full(cov.x_dim(), cov.y_dim());
  return sol;
}

/// Solves on the restriction of `cov` to `pattern`; the solution keeps the
/// pattern so its weights can be embedded back into full space.
inline CcaSolution solve_cca(const CovarianceTriple& cov, const SparsityPattern& pattern) {
  CcaSolution sol = solve_cca(restrict_to(cov, pattern));
  sol.pattern = pattern;
  return sol;
}

/// Correlation of the combinations a^T x and b^T y under the model:
/// a^T sigma_xy b / (sqrt(a^T sigma_x a) * sqrt(b^T sigma_y b)), with the
/// degenerate 0/0 case defined as 1.
inline double correlation_of(const CovarianceTriple& cov, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b) {
  if (a.size() != cov.x_dim() || b.size() != cov.y_dim())
    throw InputError("weight vector lengths (" + std::to_string(a.size()) + ", " +
                     std::to_string(b.size()) + ") do not match model dimensions (" +
                     std::to_string(cov.x_dim()) + ", " + std::to_string(cov.y_dim()) +
                     ")");
  const double num = a.dot(cov.sigma_xy * b);
  double var_a = a.dot(cov.sigma_x * a);
  double var_b = b.dot(cov.sigma_y * b);
  if (var_a < -1e-12 || var_b < -1e-12)
    throw SolverError("negative variance under a quadratic form; the model is not "
                      "positive semidefinite");
  var_a = std::max(var_a, 0.0);
  var_b = std::max(var_b, 0.0);
  const double denom = std::sqrt(var_a) * std::sqrt(var_b);
  if (denom == 0.0) {
    if (num == 0.0) return 1.0;
    throw SolverError("zero variance with nonzero cross covariance; the model is not "
                      "positive semidefinite");
  }
  return num / denom;
}

/// Evaluates a pattern-restricted solution against a (typically different)
/// full-size model: the weights are embedded into full-length vectors, zero
/// off pattern, and scored with correlation_of.
inline double true_correlation(const CovarianceTriple& true_cov, const CcaSolution& est) {
  est.pattern.validate(true_cov.x_dim(), true_cov.y_dim());
  if (est.a.size() != est.pattern.x_count() || est.b.size() != est.pattern.y_count())
    throw InputError("solution weights do not match its pattern cardinalities");
  Eigen::VectorXd a_full = Eigen::VectorXd::Zero(true_cov.x_dim());
  Eigen::VectorXd b_full = Eigen::VectorXd::Zero(true_cov.y_dim());
  for (int k = 0; k < est.pattern.x_count(); ++k)
    a_full[est.pattern.x_indices[static_cast<std::size_t>(k)]] = est.a[k];
  for (int k = 0; k < est.pattern.y_count(); ++k)
    b_full[est.pattern.y_indices[static_cast<std::size_t>(k)]] = est.b[k];
  return correlation_of(true_cov, a_full, b_full);
}

}  // namespace scca
