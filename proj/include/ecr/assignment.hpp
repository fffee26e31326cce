#pragma once

#include <vector>

namespace ecr {

// Optimal min-cost one-to-one assignment (Hungarian method, O(n^3)).
// cost[r][c] is the cost of pairing row r with column c; the matrix may be
// rectangular. Returns, per row, the assigned column or -1. Every column is
// used at most once.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace ecr
