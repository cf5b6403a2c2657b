#pragma once

#include <vector>

namespace tgen::coverage {

// Maximum-weight injective assignment rows -> columns on a dense,
// non-negative weight matrix (rows need not equal columns).
//
// The optimum total is computed with an O(n^3) Hungarian solver on the
// padded square matrix. Among all assignments attaining that total, the
// returned one is canonical: scanning rows in order, each row takes the
// smallest available column that still permits the optimal total, with
// "unmatched" ordering after every real column. This pins the tie-break so
// equal-weight matchings are reported deterministically.
struct AssignmentResult {
  std::vector<int> match_of_row;  // column per row; -1 = unmatched
  double total = 0.0;
};

AssignmentResult max_weight_assignment(
    const std::vector<std::vector<double>>& weights);

// Optimal total only (no canonicalization); exposed for the brute-force
// equivalence checks.
double max_assignment_total(const std::vector<std::vector<double>>& weights);

}  // namespace tgen::coverage
