#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "scca/errors.hpp"
#include "scca/pattern.hpp"

namespace scca {

namespace detail {

inline void require_symmetric(const Eigen::MatrixXd& s, const char* name) {
  if (s.rows() != s.cols())
    throw InputError(std::string(name) + " must be square, got " +
                     std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
  const double scale = std::max(s.cwiseAbs().maxCoeff(), 1e-30);
  const double skew = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (skew > 1e-12 * scale)
    throw InputError(std::string(name) + " is not symmetric (relative skew " +
                     std::to_string(skew / scale) + ")");
}

}  // namespace detail

/// Joint second-order model of the two multivariates: marginal covariances
/// sigma_x (n x n), sigma_y (m x m) and cross covariance sigma_xy (n x m).
/// Immutable by convention; every transform returns a new triple.
struct CovarianceTriple {
  Eigen::MatrixXd sigma_x;
  Eigen::MatrixXd sigma_y;
  Eigen::MatrixXd sigma_xy;

  CovarianceTriple(Eigen::MatrixXd sx, Eigen::MatrixXd sy, Eigen::MatrixXd sxy)
      : sigma_x(std::move(sx)), sigma_y(std::move(sy)), sigma_xy(std::move(sxy)) {
    detail::require_symmetric(sigma_x, "sigma_x");
    detail::require_symmetric(sigma_y, "sigma_y");
    if (sigma_x.rows() < 1 || sigma_y.rows() < 1)
      throw InputError("covariance blocks must have positive dimension");
    if (sigma_xy.rows() != sigma_x.rows() || sigma_xy.cols() != sigma_y.rows())
      throw InputError("sigma_xy must be " + std::to_string(sigma_x.rows()) + "x" +
                       std::to_string(sigma_y.rows()) + ", got " +
                       std::to_string(sigma_xy.rows()) + "x" +
                       std::to_string(sigma_xy.cols()));
  }

  int x_dim() const { return static_cast<int>(sigma_x.rows()); }
  int y_dim() const { return static_cast<int>(sigma_y.rows()); }

  /// Stacked (n+m) x (n+m) joint covariance [[sigma_x, sigma_xy], [sigma_xy^T, sigma_y]].
  Eigen::MatrixXd joint() const {
    const int n = x_dim(), m = y_dim();
    Eigen::MatrixXd j(n + m, n + m);
    j.topLeftCorner(n, n) = sigma_x;
    j.topRightCorner(n, m) = sigma_xy;
    j.bottomLeftCorner(m, n) = sigma_xy.transpose();
    j.bottomRightCorner(m, m) = sigma_y;
    return j;
  }
};

/// N paired samples of the two multivariates; rows are samples.
struct DataSet {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;

  DataSet(Eigen::MatrixXd x, Eigen::MatrixXd y) : X(std::move(x)), Y(std::move(y)) {
    if (X.rows() != Y.rows())
      throw InputError("X and Y must have the same number of sample rows, got " +
                       std::to_string(X.rows()) + " and " + std::to_string(Y.rows()));
    if (X.rows() < 1) throw InputError("at least one sample row is required");
  }

  int sample_count() const { return static_cast<int>(X.rows()); }
};

inline double min_joint_eigenvalue(const CovarianceTriple& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.joint(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Joint positive-semidefiniteness check, allowing `tol` of round-off on the
/// smallest eigenvalue. Separate from construction: it costs a full
/// eigendecomposition.
inline bool is_joint_psd(const CovarianceTriple& cov, double tol = 1e-10) {
  return min_joint_eigenvalue(cov) >= -tol;
}

/// Sample covariance triple X^T X / N, Y^T Y / N, X^T Y / N. With `center` the
/// column means are subtracted first (the divisor stays N).
inline CovarianceTriple estimate_covariance(const DataSet& data, bool center) {
  const double inv_n = 1.0 / data.sample_count();
  Eigen::MatrixXd xc = data.X;
  Eigen::MatrixXd yc = data.Y;
  if (center) {
    xc.rowwise() -= data.X.colwise().mean();
    yc.rowwise() -= data.Y.colwise().mean();
  }
  // rankUpdate keeps the Gram blocks exactly symmetric.
  Eigen::MatrixXd sx = Eigen::MatrixXd::Zero(xc.cols(), xc.cols());
  Eigen::MatrixXd sy = Eigen::MatrixXd::Zero(yc.cols(), yc.cols());
  sx.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose(), inv_n);
  sy.selfadjointView<Eigen::Lower>().rankUpdate(yc.transpose(), inv_n);
  sx.triangularView<Eigen::StrictlyUpper>() = sx.transpose();
  sy.triangularView<Eigen::StrictlyUpper>() = sy.transpose();
  return CovarianceTriple(std::move(sx), std::move(sy), xc.transpose() * yc * inv_n);
}

/// Adds eps_x I and eps_y I to the marginal blocks; the cross block is untouched.
inline CovarianceTriple ridge_regularize(const CovarianceTriple& cov, double eps_x,
                                         double eps_y) {
  if (eps_x < 0 || eps_y < 0) throw InputError("ridge parameters must be nonnegative");
  Eigen::MatrixXd sx = cov.sigma_x;
  Eigen::MatrixXd sy = cov.sigma_y;
  sx.diagonal().array() += eps_x;
  sy.diagonal().array() += eps_y;
  return CovarianceTriple(std::move(sx), std::move(sy), cov.sigma_xy);
}

/// Keeps only the marginal variances (off-diagonals zeroed); cross block untouched.
inline CovarianceTriple diagonalize_marginals(const CovarianceTriple& cov) {
  return CovarianceTriple(cov.sigma_x.diagonal().asDiagonal(),
                          cov.sigma_y.diagonal().asDiagonal(), cov.sigma_xy);
}

/// Replaces both marginals with the identity. Solving the result maximizes
/// covariance instead of correlation.
inline CovarianceTriple identity_marginals(const CovarianceTriple& cov) {
  return CovarianceTriple(Eigen::MatrixXd::Identity(cov.x_dim(), cov.x_dim()),
                          Eigen::MatrixXd::Identity(cov.y_dim(), cov.y_dim()),
                          cov.sigma_xy);
}

/// Extracts the principal submodel selected by `pattern`, rows/columns in
/// pattern order.
inline CovarianceTriple restrict_to(const CovarianceTriple& cov,
                                    const SparsityPattern& pattern) {
  pattern.validate(cov.x_dim(), cov.y_dim());
  const auto& xi = pattern.x_indices;
  const auto& yi = pattern.y_indices;
  if (xi.empty() || yi.empty())
    throw InputError("pattern must select at least one variable per side");
  return CovarianceTriple(cov.sigma_x(xi, xi), cov.sigma_y(yi, yi),
                          cov.sigma_xy(xi, yi));
}

}  // namespace scca
