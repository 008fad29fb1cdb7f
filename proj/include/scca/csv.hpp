#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "scca/errors.hpp"
#include "scca/experiment.hpp"
#include "scca/greedy.hpp"
#include "scca/oracle.hpp"
#include "scca/solver.hpp"

namespace scca {

/// Shortest decimal form that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view field, const std::string& file,
                           std::size_t line_no) {
  const std::string_view t = trim(field);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw InputError(file + ": row " + std::to_string(line_no) +
                     ": cannot parse numeric field '" + std::string(field) + "'");
  return value;
}

}  // namespace detail

/// Plain numeric CSV, no header unless skip_header. Every row must have the
/// same number of fields; blank lines are ignored.
inline Eigen::MatrixXd read_matrix_csv(const std::string& path, bool skip_header = false) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = skip_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string_view field = rest.substr(0, comma);
      row.push_back(detail::parse_double(field, path, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError(path + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no data rows");
  Eigen::MatrixXd mat(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return mat;
}

inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& mat) {
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j) os << ',';
      os << format_double(mat(i, j));
    }
    os << '\n';
  }
}

/// rho followed by one weight line per selected variable, full-space indices.
inline void write_solution_csv(std::ostream& os, const CcaSolution& sol) {
  os << "rho," << format_double(sol.rho) << '\n';
  for (int k = 0; k < sol.pattern.x_count(); ++k)
    os << "weight,x," << sol.pattern.x_indices[static_cast<std::size_t>(k)] << ','
       << format_double(sol.a[k]) << '\n';
  for (int k = 0; k < sol.pattern.y_count(); ++k)
    os << "weight,y," << sol.pattern.y_indices[static_cast<std::size_t>(k)] << ','
       << format_double(sol.b[k]) << '\n';
}

/// One row per step. Step 0 is the starting state (side `seed` for forward
/// runs, `full` for backward) and carries no single moved index; every later
/// row records the variable added or removed. bound_value is empty unless the
/// move was chosen by a gain bound.
inline void write_path_csv(std::ostream& os, const SparsityPath& path) {
  os << "step,side,index,card_I,card_J,rho,bound_value\n";
  os << "0," << (path.direction == GreedyDirection::Forward ? "seed" : "full") << ",-1,"
     << path.start_pattern.x_count() << ',' << path.start_pattern.y_count() << ','
     << format_double(path.start_solution.rho) << ",\n";
  for (const auto& e : path.moves) {
    os << e.step << ',' << side_name(e.side) << ',' << e.index << ','
       << e.pattern.x_count() << ',' << e.pattern.y_count() << ','
       << format_double(e.solution.rho) << ',';
    if (e.bound_value) os << format_double(*e.bound_value);
    os << '\n';
  }
}

/// Companion to write_path_csv: the weight vectors of every step's solution,
/// one row per (step, variable).
inline void write_weights_csv(std::ostream& os, const SparsityPath& path) {
  os << "step,side,variable_index,weight\n";
  auto dump = [&os](int step, const CcaSolution& sol) {
    for (int k = 0; k < sol.pattern.x_count(); ++k)
      os << step << ",x," << sol.pattern.x_indices[static_cast<std::size_t>(k)] << ','
         << format_double(sol.a[k]) << '\n';
    for (int k = 0; k < sol.pattern.y_count(); ++k)
      os << step << ",y," << sol.pattern.y_indices[static_cast<std::size_t>(k)] << ','
         << format_double(sol.b[k]) << '\n';
  };
  dump(0, path.start_solution);
  for (const auto& e : path.moves) dump(e.step, e.solution);
}

/// Optimal-correlation curve in the same column layout as write_path_csv;
/// side/index are placeholders, card columns carry the best split.
inline void write_oracle_curve_csv(std::ostream& os,
                                   const std::vector<OracleCurvePoint>& curve) {
  os << "step,side,index,card_I,card_J,rho,bound_value\n";
  int step = 0;
  for (const auto& p : curve)
    os << step++ << ",-,-1," << p.k_a << ',' << p.k_b << ',' << format_double(p.rho)
       << ",\n";
}

inline void write_curve_csv(std::ostream& os, const CurveTable& table) {
  os << "total_cardinality,method,mode,mean_rho,std_rho,trials\n";
  for (const auto& row : table.rows)
    os << row.total_cardinality << ',' << method_name(row.method) << ','
       << mode_name(row.mode) << ',' << format_double(row.mean_rho) << ','
       << format_double(row.std_rho) << ',' << row.trials << '\n';
}

}  // namespace scca
