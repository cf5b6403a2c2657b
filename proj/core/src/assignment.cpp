#include "tgen/assignment.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>

#include "tgen/error.hpp"

namespace tgen::coverage {

namespace {

constexpr double kEps = 1e-9;

// Classic potentials-based Hungarian method, minimizing cost on an n x n
// matrix; returns the assignment column of each row.
std::vector<int> solve_square_min(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      std::size_t j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  return row_to_col;
}

void check_weights(const std::vector<std::vector<double>>& weights) {
  const std::size_t cols = weights.empty() ? 0 : weights.front().size();
  for (const std::vector<double>& row : weights) {
    if (row.size() != cols) {
      throw Error(ErrorKind::invariant_violation, "weight matrix is ragged");
    }
    for (double w : row) {
      if (!(w >= 0.0)) {
        throw Error(ErrorKind::invariant_violation,
                    "weights must be non-negative");
      }
    }
  }
}

// Max-weight total over an active-row x active-column submatrix, padding to
// square with zero weights (padding pairs model "unmatched").
double submatrix_total(const std::vector<std::vector<double>>& weights,
                       const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols) {
  const std::size_t n = std::max(rows.size(), cols.size());
  if (n == 0) return 0.0;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      cost[i][j] = -weights[rows[i]][cols[j]];
    }
  }
  const std::vector<int> assignment = solve_square_min(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int j = assignment[i];
    if (j >= 0 && static_cast<std::size_t>(j) < cols.size()) {
      total += weights[rows[i]][cols[static_cast<std::size_t>(j)]];
    }
  }
  return total;
}

}  // namespace

double max_assignment_total(const std::vector<std::vector<double>>& weights) {
  check_weights(weights);
  std::vector<std::size_t> rows(weights.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::vector<std::size_t> cols(weights.empty() ? 0 : weights.front().size());
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
  return submatrix_total(weights, rows, cols);
}

AssignmentResult max_weight_assignment(
    const std::vector<std::vector<double>>& weights) {
  check_weights(weights);
  const std::size_t rows = weights.size();
  const std::size_t cols = rows == 0 ? 0 : weights.front().size();

  AssignmentResult result;
  result.match_of_row.assign(rows, -1);
  const double optimum = max_assignment_total(weights);

  std::vector<bool> col_taken(cols, false);
  double pinned = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    // remaining rows below i
    std::vector<std::size_t> rest_rows;
    for (std::size_t r = i + 1; r < rows; ++r) rest_rows.push_back(r);

    bool placed = false;
    for (std::size_t j = 0; j < cols && !placed; ++j) {
      if (col_taken[j]) continue;
      std::vector<std::size_t> rest_cols;
      for (std::size_t c = 0; c < cols; ++c) {
        if (!col_taken[c] && c != j) rest_cols.push_back(c);
      }
      const double candidate =
          pinned + weights[i][j] + submatrix_total(weights, rest_rows, rest_cols);
      if (candidate >= optimum - kEps) {
        result.match_of_row[i] = static_cast<int>(j);
        col_taken[j] = true;
        pinned += weights[i][j];
        placed = true;
      }
    }
    // otherwise row i stays unmatched; by exhaustion this preserves optimum
  }
  result.total = pinned;
  return result;
}

}  // namespace tgen::coverage
