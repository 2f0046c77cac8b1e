#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace duet {

namespace detail {

/// Kuhn-Munkres with potentials. Requires rows <= cols; returns the column
/// matched to each row.
inline std::vector<int> km_row_to_col(const std::vector<std::vector<double>>& a, int n, int m) {
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = match[j0], j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
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
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

/// Minimum total cost of a size-min(n,m) one-to-one assignment.
inline double assignment_cost(const std::vector<std::vector<double>>& cost) {
  int n = static_cast<int>(cost.size());
  int m = n ? static_cast<int>(cost[0].size()) : 0;
  if (n == 0 || m == 0) return 0.0;
  double total = 0.0;
  if (n <= m) {
    auto rc = km_row_to_col(cost, n, m);
    for (int r = 0; r < n; ++r) total += cost[r][rc[r]];
  } else {
    std::vector<std::vector<double>> t(m, std::vector<double>(n));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < m; ++c) t[c][r] = cost[r][c];
    auto rc = km_row_to_col(t, m, n);
    for (int c = 0; c < m; ++c) total += cost[rc[c]][c];
  }
  return total;
}

}  // namespace detail

/// Minimum-cost one-to-one assignment of rows to columns. Returns
/// min(n, m) pairs sorted by row. Among equal-cost optima the result is the
/// lexicographically smallest (row, col) sequence, so runs are reproducible.
/// An empty matrix yields an empty assignment. Intended for the small
/// matrices that arise in tracking; cost grows steeply past a few dozen
/// rows.
inline std::vector<std::pair<int, int>> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const int m = n ? static_cast<int>(cost[0].size()) : 0;
  if (n == 0 || m == 0) return {};
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != m)
      throw std::invalid_argument("hungarian: ragged cost matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("hungarian: cost entries must be finite");
  }

  const double total = detail::assignment_cost(cost);
  // wide enough to absorb summation-order noise, narrow enough not to
  // admit genuinely different assignments
  const double eps = 1e-12 * std::max(1.0, std::abs(total));
  const int pairs = std::min(n, m);

  // Fix pairs row by row, always choosing the smallest column that still
  // admits an optimal completion; skip a row only when enough rows remain.
  std::vector<std::pair<int, int>> result;
  std::vector<int> cols;  // remaining columns, ascending
  cols.reserve(m);
  for (int c = 0; c < m; ++c) cols.push_back(c);
  double prefix = 0.0;

  for (int r = 0; r < n && static_cast<int>(result.size()) < pairs; ++r) {
    const int needed = pairs - static_cast<int>(result.size());
    const bool can_skip = (n - r - 1) >= needed;

    auto rest_cost = [&](int excluded_col) {
      std::vector<std::vector<double>> sub;
      sub.reserve(n - r - 1);
      for (int rr = r + 1; rr < n; ++rr) {
        std::vector<double> row;
        row.reserve(cols.size() - (excluded_col >= 0 ? 1 : 0));
        for (int c : cols)
          if (c != excluded_col) row.push_back(cost[rr][c]);
        sub.push_back(std::move(row));
      }
      return detail::assignment_cost(sub);
    };

    bool fixed = false;
    for (std::size_t ci = 0; ci < cols.size(); ++ci) {
      int c = cols[ci];
      double candidate = prefix + cost[r][c] + rest_cost(c);
      if (candidate <= total + eps) {
        result.emplace_back(r, c);
        prefix += cost[r][c];
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(ci));
        fixed = true;
        break;
      }
    }
    if (!fixed && !can_skip) {
      // Numerically nothing matched the optimum; take the best candidate.
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_ci = 0;
      for (std::size_t ci = 0; ci < cols.size(); ++ci) {
        double candidate = prefix + cost[r][cols[ci]] + rest_cost(cols[ci]);
        if (candidate < best) {
          best = candidate;
          best_ci = ci;
        }
      }
      result.emplace_back(r, cols[best_ci]);
      prefix += cost[r][cols[best_ci]];
      cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(best_ci));
    }
  }
  return result;
}

}  // namespace duet
