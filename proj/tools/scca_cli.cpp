// Command-line frontend: solve, greedy, oracle and experiment subcommands over
// CSV matrices. All output is CSV with round-trip float precision; every
// source of randomness is seed-flagged so runs reproduce exactly.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scca/scca.hpp"

namespace {

struct InputOptions {
  std::string cov_x, cov_y, cov_xy;
  std::string x_file, y_file;
  bool header = false;
  bool center = true;
  double ridge_x = 0.0;
  double ridge_y = 0.0;
  std::string variant = "cca";
};

void add_input_flags(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--cov-x", in.cov_x, "CSV with the x-marginal covariance");
  cmd->add_option("--cov-y", in.cov_y, "CSV with the y-marginal covariance");
  cmd->add_option("--cov-xy", in.cov_xy, "CSV with the cross covariance");
  cmd->add_option("--x", in.x_file, "CSV of x samples (rows are observations)");
  cmd->add_option("--y", in.y_file, "CSV of y samples (rows are observations)");
  cmd->add_flag("--header", in.header, "skip one header row in input CSVs");
  cmd->add_flag("--center,!--no-center", in.center,
                "subtract column means before estimating (default on)");
  cmd->add_option("--ridge-x", in.ridge_x, "ridge added to the x marginal diagonal");
  cmd->add_option("--ridge-y", in.ridge_y, "ridge added to the y marginal diagonal");
  cmd->add_option("--variant", in.variant, "marginal treatment: cca, pls or dcca")
      ->check(CLI::IsMember({"cca", "pls", "dcca"}));
}

scca::CovarianceTriple load_model(const InputOptions& in) {
  std::optional<scca::CovarianceTriple> cov;
  const bool have_cov = !in.cov_x.empty() || !in.cov_y.empty() || !in.cov_xy.empty();
  const bool have_data = !in.x_file.empty() || !in.y_file.empty();
  if (have_cov && have_data)
    throw scca::InputError("give either covariance CSVs or sample CSVs, not both");
  if (have_cov) {
    if (in.cov_x.empty() || in.cov_y.empty() || in.cov_xy.empty())
      throw scca::InputError("--cov-x, --cov-y and --cov-xy must be given together");
    cov.emplace(scca::read_matrix_csv(in.cov_x, in.header),
                scca::read_matrix_csv(in.cov_y, in.header),
                scca::read_matrix_csv(in.cov_xy, in.header));
  } else if (have_data) {
    if (in.x_file.empty() || in.y_file.empty())
      throw scca::InputError("--x and --y must be given together");
    scca::DataSet data(scca::read_matrix_csv(in.x_file, in.header),
                       scca::read_matrix_csv(in.y_file, in.header));
    cov.emplace(scca::estimate_covariance(data, in.center));
  } else {
    throw scca::InputError("no input: give --cov-x/--cov-y/--cov-xy or --x/--y");
  }
  scca::CovarianceTriple model = scca::ridge_regularize(*cov, in.ridge_x, in.ridge_y);
  if (in.variant == "pls") return scca::identity_marginals(model);
  if (in.variant == "dcca") return scca::diagonalize_marginals(model);
  return model;
}

std::vector<scca::Method> parse_methods(const std::string& list) {
  std::vector<scca::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "cca")
      out.push_back(scca::Method::Cca);
    else if (item == "pls")
      out.push_back(scca::Method::Pls);
    else if (item == "dcca")
      out.push_back(scca::Method::Dcca);
    else
      throw scca::InputError("unknown method '" + item + "' (expected cca, pls or dcca)");
  }
  return out;
}

std::vector<scca::PathMode> parse_modes(const std::string& list) {
  std::vector<scca::PathMode> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "forward-approx")
      out.push_back(scca::PathMode::ForwardApprox);
    else if (item == "forward-exact")
      out.push_back(scca::PathMode::ForwardExact);
    else if (item == "backward")
      out.push_back(scca::PathMode::Backward);
    else if (item == "oracle")
      out.push_back(scca::PathMode::Oracle);
    else
      throw scca::InputError("unknown mode '" + item +
                             "' (expected forward-approx, forward-exact, backward or oracle)");
  }
  return out;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw scca::InputError("cannot write '" + path + "'");
  fn(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse canonical correlation analysis toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads for candidate/trial evaluation (0 = all cores); "
                 "results are identical for any value");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve the full problem on one model");
  InputOptions solve_in;
  add_input_flags(solve_cmd, solve_in);

  // greedy
  auto* greedy_cmd = app.add_subcommand("greedy", "greedy sparsity path");
  InputOptions greedy_in;
  add_input_flags(greedy_cmd, greedy_in);
  int ka = 0, kb = 0;
  greedy_cmd->add_option("--ka", ka, "target cardinality on the x side")->required();
  greedy_cmd->add_option("--kb", kb, "target cardinality on the y side")->required();
  std::string mode_str = "approx";
  auto* mode_opt = greedy_cmd->add_option("--mode", mode_str, "exact or approx")
                       ->check(CLI::IsMember({"exact", "approx"}));
  std::string direction_str = "forward";
  greedy_cmd->add_option("--direction", direction_str, "forward or backward")
      ->check(CLI::IsMember({"forward", "backward"}));
  std::string path_out = "greedy_path.csv";
  greedy_cmd->add_option("--out", path_out, "path CSV file");
  std::string weights_out;
  greedy_cmd->add_option("--weights-out", weights_out,
                         "weights CSV file (default: <out stem>_weights.csv)");
  bool solve_counts = false;
  greedy_cmd->add_flag("--solve-counts", solve_counts,
                       "also print the number of full CCA solves performed");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive reference search");
  InputOptions oracle_in;
  add_input_flags(oracle_cmd, oracle_in);
  int oka = 0, okb = 0;
  auto* oka_opt = oracle_cmd->add_option("--ka", oka, "x-side cardinality");
  auto* okb_opt = oracle_cmd->add_option("--kb", okb, "y-side cardinality");
  bool curve = false;
  oracle_cmd->add_flag("--curve", curve, "best correlation per total cardinality");
  int max_total = 0;
  oracle_cmd->add_option("--max-total", max_total,
                         "largest total cardinality for --curve (0 = n+m)");
  std::string curve_out = "oracle_curve.csv";
  oracle_cmd->add_option("--out", curve_out, "curve CSV file");
  long long budget = scca::kDefaultPatternBudget;
  oracle_cmd->add_option("--budget", budget, "largest pattern count accepted");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "reproducible simulation studies");
  exp_cmd->require_subcommand(1);
  auto* tradeoff_cmd =
      exp_cmd->add_subcommand("tradeoff", "correlation vs. sparsity over random models");
  auto* largescale_cmd =
      exp_cmd->add_subcommand("largescale", "single-instance ratio curve at scale");
  auto* regularize_cmd = exp_cmd->add_subcommand(
      "regularize", "true-correlation of sample-estimated weights vs. sparsity");

  int en = 7, em = 7, etrials = 200, edof = 0, esamples = 20;
  std::uint64_t eseed = 0;
  std::string methods_str = "cca,pls,dcca";
  std::string modes_str = "forward-approx,backward,oracle";
  long long ebudget = scca::kDefaultPatternBudget;
  std::string out_dir = ".";
  for (CLI::App* cmd : {tradeoff_cmd, largescale_cmd, regularize_cmd}) {
    cmd->add_option("--n", en, "x dimension");
    cmd->add_option("--m", em, "y dimension");
    cmd->add_option("--seed", eseed, "base RNG seed (default 0)");
    cmd->add_option("--dof", edof, "Wishart degrees of freedom (0 = n+m)");
    cmd->add_option("--out-dir", out_dir, "directory for the output CSV");
  }
  tradeoff_cmd->add_option("--trials", etrials, "number of random models");
  tradeoff_cmd->add_option("--modes", modes_str, "comma list of selection modes");
  tradeoff_cmd->add_option("--budget", ebudget, "pattern budget for oracle mode");
  largescale_cmd->get_option("--n")->default_val(100);
  largescale_cmd->get_option("--m")->default_val(100);
  regularize_cmd->get_option("--n")->default_val(10);
  regularize_cmd->get_option("--m")->default_val(10);
  regularize_cmd->add_option("--trials", etrials, "number of sample draws")
      ->default_val(500);
  regularize_cmd->add_option("--samples", esamples, "samples per trial");
  regularize_cmd->add_option("--methods", methods_str, "comma list of methods");

  // global flags like --threads remain valid after a subcommand name
  for (CLI::App* cmd : {solve_cmd, greedy_cmd, oracle_cmd, exp_cmd, tradeoff_cmd,
                        largescale_cmd, regularize_cmd})
    cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const int resolved_threads = threads == 0 ? scca::default_thread_count() : threads;

  try {
    if (app.got_subcommand(solve_cmd)) {
      const scca::CcaSolution sol = scca::solve_cca(load_model(solve_in));
      scca::write_solution_csv(std::cout, sol);
      return 0;
    }

    if (app.got_subcommand(greedy_cmd)) {
      const scca::CovarianceTriple model = load_model(greedy_in);
      scca::GreedyConfig gc;
      gc.k_a = ka;
      gc.k_b = kb;
      gc.direction = direction_str == "backward" ? scca::GreedyDirection::Backward
                                                 : scca::GreedyDirection::Forward;
      if (gc.direction == scca::GreedyDirection::Backward && mode_opt->count() == 0)
        mode_str = "exact";  // backward selection has no bound-based mode
      gc.mode = mode_str == "exact" ? scca::GreedyMode::Exact : scca::GreedyMode::Approx;
      gc.threads = resolved_threads;
      const scca::SparsityPath path = scca::run_greedy(model, gc);
      if (weights_out.empty()) {
        weights_out = path_out;
        const auto dot = weights_out.rfind(".csv");
        if (dot != std::string::npos && dot == weights_out.size() - 4)
          weights_out.resize(dot);
        weights_out += "_weights.csv";
      }
      write_file(path_out, [&](std::ostream& os) { scca::write_path_csv(os, path); });
      write_file(weights_out, [&](std::ostream& os) { scca::write_weights_csv(os, path); });
      const double final_rho =
          path.moves.empty() ? path.start_solution.rho : path.moves.back().solution.rho;
      std::cout << "rho," << scca::format_double(final_rho) << "\n";
      if (solve_counts) std::cout << "solves," << path.solve_count << "\n";
      return 0;
    }

    if (app.got_subcommand(oracle_cmd)) {
      const scca::CovarianceTriple model = load_model(oracle_in);
      if (curve) {
        const int top = max_total == 0 ? model.x_dim() + model.y_dim() : max_total;
        const auto points = scca::oracle_curve(model, top, budget, resolved_threads);
        write_file(curve_out,
                   [&](std::ostream& os) { scca::write_oracle_curve_csv(os, points); });
        std::cout << "wrote," << curve_out << "\n";
        return 0;
      }
      if (oka_opt->count() == 0 || okb_opt->count() == 0)
        throw scca::InputError("give --ka and --kb, or --curve");
      const scca::CcaSolution sol =
          scca::exhaustive_sparse_cca(model, oka, okb, budget, resolved_threads);
      scca::write_solution_csv(std::cout, sol);
      return 0;
    }

    // experiment
    scca::ExperimentConfig ec;
    ec.n = en;
    ec.m = em;
    ec.trials = etrials;
    ec.seed = eseed;
    ec.dof = edof == 0 ? en + em : edof;
    ec.samples = esamples;
    ec.methods = parse_methods(methods_str);
    ec.modes = parse_modes(modes_str);
    ec.budget = ebudget;
    ec.threads = resolved_threads;

    std::string kind;
    scca::CurveTable table;
    if (exp_cmd->got_subcommand(tradeoff_cmd)) {
      kind = "tradeoff";
      table = scca::sparsity_tradeoff_experiment(ec);
    } else if (exp_cmd->got_subcommand(largescale_cmd)) {
      kind = "largescale";
      ec.trials = 1;
      table = scca::large_scale_path(ec);
      const int half = std::max(2, (ec.n + ec.m) / 2);
      for (const auto& row : table.rows)
        if (row.total_cardinality == half)
          std::cout << "half_cardinality_ratio," << scca::format_double(row.mean_rho)
                    << "\n";
    } else {
      kind = "regularize";
      table = scca::regularization_experiment(ec);
    }
    const std::string out_path = (std::filesystem::path(out_dir) /
                                  (kind + "_" + scca::config_tag(kind, ec) + ".csv"))
                                     .string();
    write_file(out_path, [&](std::ostream& os) { scca::write_curve_csv(os, table); });
    std::cout << "wrote," << out_path << "\n";
    return 0;
  } catch (const scca::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const scca::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const scca::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
