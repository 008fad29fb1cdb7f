#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "oracle_helpers.hpp"
#include "scca/covariance.hpp"
#include "scca/random.hpp"
#include "scca/solver.hpp"

using Catch::Matchers::ContainsSubstring;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("diagonal cross block with unit marginals picks the largest entry") {
  MatrixXd cross(2, 2);
  cross << 0.5, 0, 0, 0.3;
  const scca::CovarianceTriple cov(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                                   cross);
  const auto sol = scca::solve_cca(cov);
  CHECK(sol.rho == Catch::Approx(0.5).margin(1e-14));
  CHECK(std::abs(sol.a[0] - 1.0) < 1e-12);
  CHECK(std::abs(sol.a[1]) < 1e-12);
  CHECK(std::abs(sol.b[0] - 1.0) < 1e-12);
  CHECK(std::abs(sol.b[1]) < 1e-12);
}

TEST_CASE("perfectly correlated scalars give full correlation") {
  const scca::CovarianceTriple cov(MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1),
                                   MatrixXd::Ones(1, 1));
  const auto sol = scca::solve_cca(cov);
  CHECK(sol.rho == Catch::Approx(1.0).margin(1e-14));
  CHECK(sol.a[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(sol.b[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("solver agrees with two independent reference routes") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 2 + static_cast<int>(seed % 5);
    const int m = 2 + static_cast<int>((seed / 5) % 4);
    const auto cov = scca::wishart_triple(seed, n, m, 2 * (n + m));
    const double rho = scca::solve_cca(cov).rho;
    CHECK(std::abs(rho - testref::whitened_svd_rho(cov)) < 1e-10);
    CHECK(std::abs(rho - testref::pencil_rho(cov)) < 1e-10);
  }
}

TEST_CASE("solution satisfies its normalization and consistency contracts") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto cov = scca::wishart_triple(seed, 5, 4, 18);
    const auto sol = scca::solve_cca(cov);
    CHECK(sol.rho >= 0.0);
    CHECK(sol.rho <= 1.0 + 1e-10);
    CHECK(std::abs(sol.a.dot(cov.sigma_x * sol.a) - 1.0) < 1e-10);
    CHECK(std::abs(sol.b.dot(cov.sigma_y * sol.b) - 1.0) < 1e-10);
    CHECK(std::abs(scca::correlation_of(cov, sol.a, sol.b) - sol.rho) < 1e-10);
    // sign canonicalization: first sizable entry of a is positive
    for (Eigen::Index i = 0; i < sol.a.size(); ++i) {
      if (std::abs(sol.a[i]) > 1e-12) {
        CHECK(sol.a[i] > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("correlation is zero when the cross block vanishes") {
  const scca::CovarianceTriple cov(MatrixXd::Identity(3, 3), MatrixXd::Identity(2, 2),
                                   MatrixXd::Zero(3, 2));
  VectorXd a = VectorXd::Ones(3), b = VectorXd::Ones(2);
  CHECK(scca::correlation_of(cov, a, b) == 0.0);
}

TEST_CASE("correlation flips sign but keeps magnitude under scaling") {
  scca::GaussianStream g(3);
  const auto cov = scca::wishart_triple(55, 4, 3, 14);
  for (int rep = 0; rep < 25; ++rep) {
    VectorXd a(4), b(3);
    for (int i = 0; i < 4; ++i) a[i] = g.next();
    for (int j = 0; j < 3; ++j) b[j] = g.next();
    const double base = scca::correlation_of(cov, a, b);
    const double scaled = scca::correlation_of(cov, (7.0 * a).eval(), (-3.0 * b).eval());
    CHECK(std::abs(scaled + base) < 1e-12);
  }
}

TEST_CASE("degenerate zero-over-zero correlation is one by convention") {
  const scca::CovarianceTriple zero(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2),
                                    MatrixXd::Zero(2, 2));
  CHECK(scca::correlation_of(zero, VectorXd::Ones(2), VectorXd::Ones(2)) == 1.0);
}

TEST_CASE("correlation rejects mismatched lengths and non-PSD models") {
  const auto cov = scca::wishart_triple(1, 3, 3, 8);
  CHECK_THROWS_AS(scca::correlation_of(cov, VectorXd::Ones(2), VectorXd::Ones(3)),
                  scca::InputError);
  MatrixXd indefinite = MatrixXd::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  const scca::CovarianceTriple bad(indefinite, MatrixXd::Identity(2, 2),
                                   MatrixXd::Zero(2, 2));
  VectorXd along = VectorXd::Zero(2);
  along[1] = 1.0;
  CHECK_THROWS_AS(scca::correlation_of(bad, along, VectorXd::Ones(2)), scca::SolverError);
}

TEST_CASE("rho is invariant under positive diagonal rescaling of x") {
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const auto cov = scca::wishart_triple(seed, 4, 4, 16);
    scca::GaussianStream g(seed);
    VectorXd scale(4);
    for (int i = 0; i < 4; ++i) scale[i] = std::exp(g.next());
    const MatrixXd d = scale.asDiagonal();
    const scca::CovarianceTriple rescaled(d * cov.sigma_x * d, cov.sigma_y,
                                          d * cov.sigma_xy);
    CHECK(std::abs(scca::solve_cca(rescaled).rho - scca::solve_cca(cov).rho) < 1e-10);
  }
}

TEST_CASE("swapping the two sides keeps rho and exchanges the weights") {
  const auto cov = scca::wishart_triple(9, 4, 3, 14);
  const scca::CovarianceTriple swapped(cov.sigma_y, cov.sigma_x,
                                       cov.sigma_xy.transpose());
  const auto sol = scca::solve_cca(cov);
  const auto sol_swapped = scca::solve_cca(swapped);
  CHECK(std::abs(sol.rho - sol_swapped.rho) < 1e-10);
  // equal up to the common sign flip chosen by canonicalization
  const double flip = sol_swapped.a.dot(sol.b) > 0 ? 1.0 : -1.0;
  CHECK((sol_swapped.a - flip * sol.b).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((sol_swapped.b - flip * sol.a).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("single-pair restriction has the closed-form correlation") {
  const auto cov = scca::wishart_triple(21, 5, 5, 12);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const auto sol = scca::solve_cca(cov, scca::SparsityPattern({i}, {j}));
      const double expected = std::abs(cov.sigma_xy(i, j)) /
                              (std::sqrt(cov.sigma_x(i, i)) * std::sqrt(cov.sigma_y(j, j)));
      CHECK(std::abs(sol.rho - expected) < 1e-12);
    }
  }
}

TEST_CASE("a singular marginal beyond the jitter policy names the offending block") {
  const scca::CovarianceTriple cov(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                   MatrixXd::Zero(2, 2));
  CHECK_THROWS_WITH(scca::solve_cca(cov), ContainsSubstring("x marginal"));
  const scca::CovarianceTriple cov_y(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2),
                                     MatrixXd::Zero(2, 2));
  CHECK_THROWS_WITH(scca::solve_cca(cov_y), ContainsSubstring("y marginal"));
}

TEST_CASE("jitter rescues a PSD-singular marginal with positive trace") {
  MatrixXd duplicated(2, 2);
  duplicated << 1, 1, 1, 1;  // x2 duplicates x1
  MatrixXd cross(2, 1);
  cross << 0.6, 0.6;
  const scca::CovarianceTriple cov(duplicated, MatrixXd::Identity(1, 1), cross);
  const auto sol = scca::solve_cca(cov);
  CHECK(sol.rho == Catch::Approx(0.6).margin(1e-4));
}

TEST_CASE("rank-deficient joint sample yields full correlation") {
  scca::GaussianStream g(77);
  const scca::DataSet data(scca::gaussian_matrix(g, 4, 3), scca::gaussian_matrix(g, 4, 3));
  const auto est = scca::estimate_covariance(data, false);  // rank 4 < 6 joint
  CHECK(scca::solve_cca(est).rho == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("true-correlation scoring embeds pattern weights into full space") {
  const auto truth = scca::wishart_triple(13, 4, 4, 16);

  SECTION("weights solved on the true model reproduce its rho") {
    const auto sol = scca::solve_cca(truth);
    CHECK(std::abs(scca::true_correlation(truth, sol) - sol.rho) < 1e-10);
  }

  SECTION("full-support pattern equals plain correlation") {
    const auto sol = scca::solve_cca(truth);
    CHECK(scca::true_correlation(truth, sol) ==
          Catch::Approx(scca::correlation_of(truth, sol.a, sol.b)).margin(1e-15));
  }

  SECTION("restricted weights score with zeros off pattern") {
    const scca::SparsityPattern pattern({1, 3}, {0, 2});
    const auto sol = scca::solve_cca(truth, pattern);
    VectorXd a_full = VectorXd::Zero(4), b_full = VectorXd::Zero(4);
    a_full[1] = sol.a[0];
    a_full[3] = sol.a[1];
    b_full[0] = sol.b[0];
    b_full[2] = sol.b[1];
    CHECK(scca::true_correlation(truth, sol) ==
          Catch::Approx(scca::correlation_of(truth, a_full, b_full)).margin(1e-15));
  }

  SECTION("large-sample estimates approach the true correlation") {
    const scca::JointGaussianSampler sampler(truth);
    const auto est = scca::estimate_covariance(sampler.draw(5, 1000), false);
    const auto sol = scca::solve_cca(est);
    CHECK(std::abs(scca::true_correlation(truth, sol) - scca::solve_cca(truth).rho) < 0.05);
  }
}
