#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "scca/errors.hpp"

namespace scca {

enum class Side { X, Y };

inline const char* side_name(Side s) { return s == Side::X ? "x" : "y"; }

/// Index sets selecting the active variables of each multivariate.
/// Both lists are kept strictly increasing.
struct SparsityPattern {
  std::vector<int> x_indices;
  std::vector<int> y_indices;

  SparsityPattern() = default;
  SparsityPattern(std::vector<int> xs, std::vector<int> ys)
      : x_indices(std::move(xs)), y_indices(std::move(ys)) {}

  int x_count() const { return static_cast<int>(x_indices.size()); }
  int y_count() const { return static_cast<int>(y_indices.size()); }
  int total_cardinality() const { return x_count() + y_count(); }

  const std::vector<int>& side_indices(Side s) const {
    return s == Side::X ? x_indices : y_indices;
  }

  bool contains(Side s, int index) const {
    const auto& v = side_indices(s);
    return std::binary_search(v.begin(), v.end(), index);
  }

  /// Copy with `index` inserted on `side`, keeping the list sorted.
  SparsityPattern with(Side s, int index) const {
    SparsityPattern out = *this;
    auto& v = s == Side::X ? out.x_indices : out.y_indices;
    auto pos = std::lower_bound(v.begin(), v.end(), index);
    if (pos != v.end() && *pos == index)
      throw InputError("pattern already contains " + std::string(side_name(s)) +
                       " index " + std::to_string(index));
    v.insert(pos, index);
    return out;
  }

  /// Copy with `index` removed from `side`.
  SparsityPattern without(Side s, int index) const {
    SparsityPattern out = *this;
    auto& v = s == Side::X ? out.x_indices : out.y_indices;
    auto pos = std::lower_bound(v.begin(), v.end(), index);
    if (pos == v.end() || *pos != index)
      throw InputError("pattern does not contain " + std::string(side_name(s)) +
                       " index " + std::to_string(index));
    v.erase(pos);
    return out;
  }

  static SparsityPattern full(int n, int m) {
    SparsityPattern p;
    p.x_indices.resize(static_cast<std::size_t>(n));
    p.y_indices.resize(static_cast<std::size_t>(m));
    std::iota(p.x_indices.begin(), p.x_indices.end(), 0);
    std::iota(p.y_indices.begin(), p.y_indices.end(), 0);
    return p;
  }

  /// Checks strict ordering and index ranges against full dimensions (n, m).
  void validate(int n, int m) const {
    auto check = [](const std::vector<int>& v, int dim, const char* side) {
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] < 0 || v[k] >= dim)
          throw InputError(std::string(side) + " index " + std::to_string(v[k]) +
                           " out of range [0, " + std::to_string(dim) + ")");
        if (k > 0 && v[k] <= v[k - 1])
          throw InputError(std::string(side) + " indices must be strictly increasing");
      }
    };
    check(x_indices, n, "x");
    check(y_indices, m, "y");
  }

  bool operator==(const SparsityPattern&) const = default;
};

}  // namespace scca
