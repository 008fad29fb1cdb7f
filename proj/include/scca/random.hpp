#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

#include "scca/covariance.hpp"
#include "scca/errors.hpp"

namespace scca {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Decorrelated per-stream seed so that stream k of base seed s never collides
/// with stream 0 of seed s+k. Used to give every trial its own generator.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x51'7C'C1'B7'27'22'0A'95ull));
}

/// Deterministic standard-normal stream: mt19937_64 bits fed through an
/// explicit Box-Muller transform. std::normal_distribution is avoided because
/// its output sequence is implementation-defined.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;          // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// rows x cols matrix of i.i.d. standard normals, filled row by row.
inline Eigen::MatrixXd gaussian_matrix(GaussianStream& g, Eigen::Index rows,
                                       Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = g.next();
  return out;
}

/// Draws a random (n + m)-dimensional Gram matrix W = G^T G / dof from `dof`
/// i.i.d. standard Gaussian rows and partitions it into an (n, m) triple.
/// Deterministic for a fixed seed.
inline CovarianceTriple wishart_triple(std::uint64_t seed, int n, int m, int dof) {
  if (n < 1 || m < 1) throw InputError("wishart dimensions must be positive");
  const int dim = n + m;
  if (dof < dim)
    throw InputError("wishart degrees of freedom (" + std::to_string(dof) +
                     ") must be at least the dimension (" + std::to_string(dim) +
                     "), the sample would be singular");
  GaussianStream g(seed);
  Eigen::MatrixXd samples = gaussian_matrix(g, dof, dim);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
  w.selfadjointView<Eigen::Lower>().rankUpdate(samples.transpose(), 1.0 / dof);
  w.triangularView<Eigen::StrictlyUpper>() = w.transpose();
  return CovarianceTriple(w.topLeftCorner(n, n), w.bottomRightCorner(m, m),
                          w.topRightCorner(n, m));
}

/// Draws joint Gaussian samples whose population covariance is a given triple.
/// The factor comes from an eigendecomposition with negative round-off
/// eigenvalues floored at zero, so estimated (merely PSD) triples are accepted.
class JointGaussianSampler {
 public:
  explicit JointGaussianSampler(const CovarianceTriple& cov)
      : n_(cov.x_dim()), m_(cov.y_dim()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.joint());
    if (es.info() != Eigen::Success)
      throw SolverError("eigendecomposition of the joint covariance failed");
    factor_ = es.eigenvectors() *
              es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  DataSet draw(std::uint64_t seed, int sample_count) const {
    if (sample_count < 1) throw InputError("sample count must be positive");
    GaussianStream g(seed);
    Eigen::MatrixXd z = gaussian_matrix(g, sample_count, n_ + m_);
    Eigen::MatrixXd samples = z * factor_.transpose();
    return DataSet(samples.leftCols(n_), samples.rightCols(m_));
  }

 private:
  Eigen::MatrixXd factor_;
  int n_;
  int m_;
};

}  // namespace scca
