#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <string>

#include "cli_runner.hpp"
#include "scca/csv.hpp"
#include "scca/random.hpp"

using Catch::Matchers::ContainsSubstring;
using Eigen::MatrixXd;

namespace {

namespace fs = std::filesystem;
using clitest::RunResult;
using clitest::slurp;

const clitest::CliRunner& runner() {
  static const clitest::CliRunner r("scca_cli_tests");
  return r;
}

const fs::path& work_dir() { return runner().dir(); }

RunResult run_cli(const std::string& args) { return runner().run(args); }

std::string write_matrix(const std::string& name, const MatrixXd& mat) {
  return runner().write_matrix(name, mat);
}

std::string write_triple(const std::string& stem, const scca::CovarianceTriple& cov) {
  return runner().triple_flags(stem, cov);
}

double parsed_rho(const std::string& out) {
  REQUIRE_THAT(out, ContainsSubstring("rho,"));
  const auto pos = out.find("rho,");
  return std::stod(out.substr(pos + 4));
}

}  // namespace

TEST_CASE("solve prints rho and weights for a diagonal model") {
  MatrixXd cross = MatrixXd::Zero(2, 2);
  cross(0, 0) = 0.5;
  cross(1, 1) = 0.3;
  const scca::CovarianceTriple cov(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                                   cross);
  const auto res = run_cli("solve " + write_triple("diag", cov));
  CHECK(res.exit_code == 0);
  CHECK_THAT(res.out, ContainsSubstring("rho,0.5\n"));
  CHECK_THAT(res.out, ContainsSubstring("weight,x,0,"));
  CHECK_THAT(res.out, ContainsSubstring("weight,y,1,"));
}

TEST_CASE("ragged input exits with code 2 naming file and row") {
  const fs::path bad = work_dir() / "bad.csv";
  std::ofstream(bad) << "1,0\n0\n";
  const std::string good = write_matrix("good_id.csv", MatrixXd::Identity(2, 2));
  const auto res = run_cli("solve --cov-x " + bad.string() + " --cov-y " + good +
                           " --cov-xy " + good);
  CHECK(res.exit_code == 2);
  CHECK_THAT(res.err, ContainsSubstring("bad.csv"));
  CHECK_THAT(res.err, ContainsSubstring("row 2"));
}

TEST_CASE("missing flags and unknown flags exit with code 2") {
  CHECK(run_cli("solve").exit_code == 2);
  CHECK(run_cli("greedy --ka 1").exit_code == 2);
  CHECK(run_cli("solve --definitely-not-a-flag 1").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
}

TEST_CASE("a singular marginal exits with code 3") {
  const scca::CovarianceTriple cov(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                   MatrixXd::Zero(2, 2));
  const auto res = run_cli("solve " + write_triple("singular", cov));
  CHECK(res.exit_code == 3);
  CHECK_THAT(res.err, ContainsSubstring("x marginal"));
}

TEST_CASE("an over-budget exhaustive search exits with code 4") {
  const scca::CovarianceTriple cov(MatrixXd::Identity(20, 20), MatrixXd::Identity(20, 20),
                                   MatrixXd::Zero(20, 20));
  const auto res = run_cli("oracle " + write_triple("big", cov) + " --ka 5 --kb 5");
  CHECK(res.exit_code == 4);
  CHECK_THAT(res.err, ContainsSubstring("240374016"));
}

TEST_CASE("swapping the x and y inputs leaves rho unchanged") {
  scca::GaussianStream g(31);
  const std::string fx = write_matrix("swap_x.csv", scca::gaussian_matrix(g, 12, 3));
  const std::string fy = write_matrix("swap_y.csv", scca::gaussian_matrix(g, 12, 2));
  const auto ab = run_cli("solve --x " + fx + " --y " + fy);
  const auto ba = run_cli("solve --x " + fy + " --y " + fx);
  REQUIRE(ab.exit_code == 0);
  REQUIRE(ba.exit_code == 0);
  CHECK(std::abs(parsed_rho(ab.out) - parsed_rho(ba.out)) < 1e-10);
}

TEST_CASE("ridge regularization pulls a rank-deficient solve away from one") {
  scca::GaussianStream g(47);
  const std::string fx = write_matrix("rank_x.csv", scca::gaussian_matrix(g, 5, 4));
  const std::string fy = write_matrix("rank_y.csv", scca::gaussian_matrix(g, 5, 4));
  const auto plain = run_cli("solve --x " + fx + " --y " + fy);
  REQUIRE(plain.exit_code == 0);
  CHECK(parsed_rho(plain.out) > 1.0 - 1e-6);
  const auto ridged = run_cli("solve --x " + fx + " --y " + fy +
                              " --ridge-x 0.01 --ridge-y 0.01");
  REQUIRE(ridged.exit_code == 0);
  CHECK(parsed_rho(ridged.out) < 0.999);
}

TEST_CASE("header rows are skipped with --header") {
  const fs::path p = work_dir() / "with_header.csv";
  std::ofstream(p) << "a,b\n1,0\n0,1\n";
  const std::string id = write_matrix("plain_id.csv", MatrixXd::Identity(2, 2));
  const auto res = run_cli("solve --cov-x " + p.string() + " --header --cov-y " + id +
                           " --cov-xy " + id);
  // --header also skips the first row of the headerless identity files,
  // leaving a 1x2 block, so shape validation must reject it
  CHECK(res.exit_code == 2);
  const std::string id3 = write_matrix("id3.csv", MatrixXd::Identity(3, 3));
  const fs::path hy = work_dir() / "hy.csv";
  std::ofstream(hy) << "c1,c2,c3\n1,0,0\n0,1,0\n0,0,1\n";
  const fs::path hxy = work_dir() / "hxy.csv";
  std::ofstream(hxy) << "c1,c2,c3\n0.5,0,0\n0,0.25,0\n0,0,0.1\n";
  const fs::path hx = work_dir() / "hx.csv";
  std::ofstream(hx) << "c1,c2,c3\n1,0,0\n0,1,0\n0,0,1\n";
  const auto ok = run_cli("solve --header --cov-x " + hx.string() + " --cov-y " +
                          hy.string() + " --cov-xy " + hxy.string());
  CHECK(ok.exit_code == 0);
  CHECK_THAT(ok.out, ContainsSubstring("rho,0.5\n"));
}

TEST_CASE("estimation centers by default and --no-center disables it") {
  scca::GaussianStream g(60);
  const MatrixXd x = scca::gaussian_matrix(g, 30, 3).array() + 50.0;  // large offset
  const MatrixXd y = scca::gaussian_matrix(g, 30, 2).array() - 20.0;
  const std::string fx = write_matrix("center_x.csv", x);
  const std::string fy = write_matrix("center_y.csv", y);
  const scca::DataSet data(x, y);
  const double centered = scca::solve_cca(scca::estimate_covariance(data, true)).rho;
  const double raw = scca::solve_cca(scca::estimate_covariance(data, false)).rho;

  const auto by_default = run_cli("solve --x " + fx + " --y " + fy);
  REQUIRE(by_default.exit_code == 0);
  CHECK(std::abs(parsed_rho(by_default.out) - centered) < 1e-12);

  const auto uncentered = run_cli("solve --x " + fx + " --y " + fy + " --no-center");
  REQUIRE(uncentered.exit_code == 0);
  CHECK(std::abs(parsed_rho(uncentered.out) - raw) < 1e-12);
  CHECK(std::abs(centered - raw) > 1e-3);  // the offset makes the two differ
}

TEST_CASE("greedy writes the path files and reports solve counts") {
  const auto cov = scca::wishart_triple(18, 5, 5, 10);
  const std::string flags = write_triple("greedy", cov);
  const auto res = run_cli("greedy " + flags +
                           " --ka 2 --kb 2 --mode approx --out gp.csv --solve-counts");
  REQUIRE(res.exit_code == 0);
  CHECK_THAT(res.out, ContainsSubstring("solves,3\n"));  // k_a + k_b - 1
  const std::string path_csv = slurp(work_dir() / "gp.csv");
  CHECK_THAT(path_csv, ContainsSubstring("step,side,index,card_I,card_J,rho,bound_value"));
  CHECK_THAT(path_csv, ContainsSubstring("0,seed,-1,1,1,"));
  const std::string weights_csv = slurp(work_dir() / "gp_weights.csv");
  CHECK_THAT(weights_csv, ContainsSubstring("step,side,variable_index,weight"));
}

TEST_CASE("backward greedy defaults to exact mode") {
  const auto cov = scca::wishart_triple(21, 4, 4, 8);
  const std::string flags = write_triple("backward", cov);
  const auto res = run_cli("greedy " + flags +
                           " --ka 1 --kb 1 --direction backward --out bw.csv");
  CHECK(res.exit_code == 0);
  CHECK_THAT(slurp(work_dir() / "bw.csv"), ContainsSubstring("0,full,-1,4,4,"));
  // explicitly requesting approx backward is an input error
  CHECK(run_cli("greedy " + flags +
                " --ka 1 --kb 1 --direction backward --mode approx --out bw2.csv")
            .exit_code == 2);
}

TEST_CASE("the pls variant maximizes the top singular value of the cross block") {
  const auto cov = scca::wishart_triple(64, 4, 4, 16);
  const std::string flags = write_triple("pls", cov);
  const auto res = run_cli("greedy " + flags + " --variant pls --ka 4 --kb 4 --out pls.csv");
  REQUIRE(res.exit_code == 0);
  Eigen::JacobiSVD<MatrixXd> svd(cov.sigma_xy);
  CHECK(std::abs(parsed_rho(res.out) - svd.singularValues()(0)) < 1e-10);
}

TEST_CASE("oracle curve files share the path column layout") {
  const auto cov = scca::wishart_triple(11, 3, 3, 9);
  const auto res =
      run_cli("oracle " + write_triple("curve", cov) + " --curve --out oc.csv");
  REQUIRE(res.exit_code == 0);
  const std::string csv = slurp(work_dir() / "oc.csv");
  CHECK_THAT(csv, ContainsSubstring("step,side,index,card_I,card_J,rho,bound_value"));
  CHECK_THAT(csv, ContainsSubstring("0,-,-1,1,1,"));
}

TEST_CASE("experiments rerun to byte-identical outputs") {
  const std::string cmd =
      "experiment regularize --n 3 --m 3 --trials 4 --samples 12 --seed 9 --methods cca,pls";
  const auto first = run_cli(cmd);
  REQUIRE(first.exit_code == 0);
  REQUIRE_THAT(first.out, ContainsSubstring("wrote,"));
  const std::string file =
      first.out.substr(first.out.find("wrote,") + 6,
                       first.out.find('\n', first.out.find("wrote,")) -
                           first.out.find("wrote,") - 6);
  const std::string bytes = slurp(work_dir() / file);
  const auto second = run_cli(cmd);
  CHECK(second.out == first.out);
  CHECK(slurp(work_dir() / file) == bytes);

  const auto threaded = run_cli(cmd + " --threads 2");
  CHECK(threaded.out == first.out);  // same tag, same bytes
  CHECK(slurp(work_dir() / file) == bytes);
}

TEST_CASE("tradeoff experiments emit one row per mode and cardinality") {
  const auto res = run_cli(
      "experiment tradeoff --n 3 --m 3 --trials 2 --seed 1 --modes forward-approx,oracle");
  REQUIRE(res.exit_code == 0);
  const std::string file =
      res.out.substr(res.out.find("wrote,") + 6,
                     res.out.find('\n', res.out.find("wrote,")) - res.out.find("wrote,") - 6);
  const std::string csv = slurp(work_dir() / file);
  std::size_t rows = 0;
  for (char c : csv) rows += c == '\n';
  CHECK(rows == 1 + 2 * 5);  // header + (cardinalities 2..6) x 2 modes
  CHECK_THAT(csv, ContainsSubstring("total_cardinality,method,mode,mean_rho,std_rho,trials"));
  CHECK_THAT(csv, ContainsSubstring(",cca,oracle,"));
}

TEST_CASE("largescale experiments report the half-cardinality ratio") {
  const auto res = run_cli("experiment largescale --n 8 --m 8 --seed 2");
  REQUIRE(res.exit_code == 0);
  CHECK_THAT(res.out, ContainsSubstring("half_cardinality_ratio,"));
  CHECK_THAT(res.out, ContainsSubstring("wrote,"));
}
