#include "ecr/assignment.hpp"

#include <algorithm>
#include <limits>

namespace ecr {

// Potentials formulation over a (rows+1) x (cols+1) grid with a virtual
// 0-th row/column; rows are inserted one at a time along augmenting paths.
static std::vector<int> solve_rows_le_cols(const std::vector<std::vector<double>>& cost) {
  int n = int(cost.size());
  int m = n == 0 ? 0 : int(cost[0].size());
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0);  // match[col] = row (1-based), 0 = free

  for (int i = 1; i <= n; ++i) {
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, false);
    std::vector<int> way(m + 1, 0);
    match[0] = i;
    int j0 = 0;
    do {
      used[j0] = true;
      int i0 = match[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  int n = int(cost.size());
  if (n == 0) return {};
  int m = int(cost[0].size());
  if (m == 0) return std::vector<int>(n, -1);

  if (n <= m) return solve_rows_le_cols(cost);

  // Transpose so rows <= cols, then invert the mapping.
  std::vector<std::vector<double>> t(m, std::vector<double>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < m; ++c) t[c][r] = cost[r][c];
  }
  std::vector<int> col_to_row = solve_rows_le_cols(t);
  std::vector<int> row_to_col(n, -1);
  for (int c = 0; c < m; ++c) {
    if (col_to_row[c] >= 0) row_to_col[col_to_row[c]] = c;
  }
  return row_to_col;
}

}  // namespace ecr
