#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "scca/covariance.hpp"
#include "scca/random.hpp"

using Eigen::MatrixXd;

TEST_CASE("wishart draws are bitwise deterministic for a fixed seed") {
  const auto a = scca::wishart_triple(1234, 7, 7, 14);
  const auto b = scca::wishart_triple(1234, 7, 7, 14);
  CHECK(a.sigma_x.isApprox(b.sigma_x, 0.0));
  CHECK(a.sigma_y.isApprox(b.sigma_y, 0.0));
  CHECK(a.sigma_xy.isApprox(b.sigma_xy, 0.0));
  const auto c = scca::wishart_triple(1235, 7, 7, 14);
  CHECK_FALSE(a.sigma_x.isApprox(c.sigma_x, 0.0));
}

TEST_CASE("wishart samples at dof = dim are strictly positive definite") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto cov = scca::wishart_triple(seed, 5, 5, 10);
    CHECK(scca::min_joint_eigenvalue(cov) > 0.0);
  }
}

TEST_CASE("partition blocks come from one underlying Gram matrix") {
  // Same seed, different splits: the x block of the (7, 7) split must be the
  // leading block of the (11, 3) split's joint matrix.
  const auto even = scca::wishart_triple(88, 7, 7, 14);
  const auto skew = scca::wishart_triple(88, 11, 3, 14);
  CHECK(skew.joint().topLeftCorner(7, 7).isApprox(even.sigma_x, 0.0));
  CHECK(skew.joint().isApprox(even.joint(), 0.0));
}

TEST_CASE("wishart rejects insufficient degrees of freedom") {
  CHECK_THROWS_AS(scca::wishart_triple(0, 4, 4, 7), scca::InputError);
  CHECK_NOTHROW(scca::wishart_triple(0, 4, 4, 8));
}

TEST_CASE("gaussian stream has standard moments") {
  scca::GaussianStream g(5);
  const int count = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < count; ++i) {
    const double v = g.next();
    sum += v;
    sum_sq += v * v;
  }
  CHECK(std::abs(sum / count) < 0.01);
  CHECK(std::abs(sum_sq / count - 1.0) < 0.02);
}

TEST_CASE("joint sampler reproduces the target covariance") {
  const auto truth = scca::wishart_triple(7, 3, 3, 12);
  const scca::JointGaussianSampler sampler(truth);
  const scca::DataSet data = sampler.draw(11, 1000000);
  const auto est = scca::estimate_covariance(data, false);
  CHECK((est.sigma_x - truth.sigma_x).cwiseAbs().maxCoeff() < 0.01);
  CHECK((est.sigma_y - truth.sigma_y).cwiseAbs().maxCoeff() < 0.01);
  CHECK((est.sigma_xy - truth.sigma_xy).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("joint sampler accepts merely PSD models") {
  MatrixXd ones(2, 2);
  ones << 1, 1, 1, 1;  // rank one
  const scca::CovarianceTriple cov(ones, ones, ones);
  const scca::JointGaussianSampler sampler(cov);
  const scca::DataSet data = sampler.draw(3, 50);
  // every coordinate of a draw is the same latent value, up to the sqrt of
  // the eigendecomposition round-off
  CHECK((data.X.col(0) - data.Y.col(1)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("derived seeds separate streams and bases") {
  CHECK(scca::derive_seed(0, 0) != scca::derive_seed(0, 1));
  CHECK(scca::derive_seed(0, 1) != scca::derive_seed(1, 0));
  CHECK(scca::derive_seed(3, 4) == scca::derive_seed(3, 4));
}
