/* Copyright 2026 The DCL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dcl/hungarian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcl {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> init) {
  rows_ = init.size();
  cols_ = rows_ ? init.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& row : init) {
    if (row.size() != cols_) throw std::invalid_argument("ragged cost matrix");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest augmenting path with potentials over the submatrix selected by
// `rows` x `cols`. Requires rows.size() <= cols.size(). Returns, per selected
// row, the position in `cols` it is assigned to.
std::vector<std::size_t> solve_wide(const CostMatrix& a, const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& cols) {
  const std::size_t n = rows.size();
  const std::size_t m = cols.size();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(rows[i0 - 1], cols[j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
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
  std::vector<std::size_t> assigned(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) assigned[p[j] - 1] = j - 1;
  }
  return assigned;
}

// Optimal cost of the submatrix, pairing min(|rows|, |cols|) entries.
double solve_cost(const CostMatrix& a, const std::vector<std::size_t>& rows,
                  const std::vector<std::size_t>& cols) {
  if (rows.empty() || cols.empty()) return 0.0;
  double total = 0.0;
  if (rows.size() <= cols.size()) {
    const auto asg = solve_wide(a, rows, cols);
    for (std::size_t i = 0; i < rows.size(); ++i) total += a(rows[i], cols[asg[i]]);
  } else {
    CostMatrix t(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
    const auto asg = solve_wide(t, cols, rows);
    for (std::size_t j = 0; j < cols.size(); ++j) total += a(rows[asg[j]], cols[j]);
  }
  return total;
}

}  // namespace

Assignment hungarian_match(const CostMatrix& cost) {
  Assignment out;
  if (cost.empty()) return out;
  for (std::size_t r = 0; r < cost.rows(); ++r)
    for (std::size_t c = 0; c < cost.cols(); ++c)
      if (!std::isfinite(cost(r, c))) throw std::invalid_argument("non-finite cost entry");

  std::vector<std::size_t> all_rows(cost.rows()), free_cols(cost.cols());
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  for (std::size_t j = 0; j < free_cols.size(); ++j) free_cols[j] = j;
  const double optimum = solve_cost(cost, all_rows, free_cols);
  const double tol = 1e-10 * (1.0 + std::abs(optimum));
  const std::size_t needed = std::min(cost.rows(), cost.cols());

  // Fix rows in order to the smallest column that still admits an optimal
  // completion; this realizes the lexicographic tie-break. When rows > cols a
  // row with no such column stays unassigned.
  double fixed = 0.0;
  for (std::size_t i = 0; i < cost.rows() && out.pairs.size() < needed; ++i) {
    std::vector<std::size_t> rest_rows(all_rows.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                       all_rows.end());
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
      std::vector<std::size_t> rest_cols = free_cols;
      rest_cols.erase(rest_cols.begin() + static_cast<std::ptrdiff_t>(k));
      const std::size_t still = needed - out.pairs.size() - 1;
      if (std::min(rest_rows.size(), rest_cols.size()) != still) continue;
      const double c = cost(i, free_cols[k]);
      const double total = fixed + c + solve_cost(cost, rest_rows, rest_cols);
      if (total <= optimum + tol) {
        out.pairs.emplace_back(i, free_cols[k]);
        fixed += c;
        free_cols = std::move(rest_cols);
        break;
      }
    }
  }
  out.total_cost = fixed;
  return out;
}

}  // namespace dcl
