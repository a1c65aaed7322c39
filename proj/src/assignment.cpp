// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "panopose/error.hpp"
#include "panopose/metrics.hpp"

namespace panopose {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(Errc::shape, "ragged cost matrix");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Solution {
  std::vector<std::size_t> partner;  // column for each row
  std::vector<double> u, v;          // dual potentials
};

// Shortest augmenting path Hungarian method for rows <= cols. Potentials
// satisfy u[i] + v[j] <= c(i, j) with equality on the returned pairs, and
// v[j] == 0 on unassigned columns.
Solution hungarian(const CostMatrix& c) {
  const std::size_t n = c.rows(), m = c.cols();
  // 1-based with a virtual column 0 as in the classic formulation.
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
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
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

  Solution s;
  s.partner.assign(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) s.partner[p[j] - 1] = j - 1;
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

double row_order_sum(const CostMatrix& c, const std::vector<std::size_t>& partner) {
  double total = 0.0;
  for (std::size_t i = 0; i < partner.size(); ++i) total += c(i, partner[i]);
  return total;
}

// Optimal cost of rows [first, n) over the columns not in `taken`, and the
// partners it uses (as original column indices).
std::pair<double, std::vector<std::size_t>> solve_rest(const CostMatrix& c, std::size_t first,
                                                       const std::vector<char>& taken) {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < c.cols(); ++j)
    if (!taken[j]) cols.push_back(j);
  const std::size_t rows = c.rows() - first;
  if (rows == 0) return {0.0, {}};
  CostMatrix sub(rows, cols.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = c(first + i, cols[j]);
  auto s = hungarian(sub);
  std::vector<std::size_t> partner(rows);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    partner[i] = cols[s.partner[i]];
    total += sub(i, s.partner[i]);
  }
  return {total, std::move(partner)};
}

// Lexicographically smallest optimal partner sequence for rows <= cols.
std::vector<std::size_t> lex_min_optimal(const CostMatrix& c) {
  const std::size_t n = c.rows();
  auto best = hungarian(c);
  const double optimum = row_order_sum(c, best.partner);

  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) scale = std::max(scale, std::abs(c(i, j)));
  const double tol = 1e-12 * scale * static_cast<double>(n);

  std::vector<std::size_t> current = best.partner;
  std::vector<char> taken(c.cols(), 0);
  double prefix = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < current[i]; ++j) {
      if (taken[j]) continue;
      // Complementary slackness: only tight edges can appear in an optimum.
      if (c(i, j) - best.u[i] - best.v[j] > tol) continue;
      taken[j] = 1;
      auto [rest, partners] = solve_rest(c, i + 1, taken);
      taken[j] = 0;
      if (prefix + c(i, j) + rest <= optimum + tol) {
        current[i] = j;
        std::copy(partners.begin(), partners.end(), current.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        break;
      }
    }
    taken[current[i]] = 1;
    prefix += c(i, current[i]);
  }
  return current;
}

void require_finite(const CostMatrix& c) {
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j)
      if (!std::isfinite(c(i, j)))
        throw Error(Errc::range, "cost matrix entry (" + std::to_string(i) + ", " +
                                     std::to_string(j) + ") is not finite");
}

Assignment to_assignment(const CostMatrix& oriented, const std::vector<std::size_t>& partner,
                         bool transposed) {
  Assignment a;
  for (std::size_t i = 0; i < partner.size(); ++i) {
    a.pairs.emplace_back(transposed ? partner[i] : i, transposed ? i : partner[i]);
    a.total_cost += oriented(i, partner[i]);
  }
  return a;
}

void enumerate(const CostMatrix& c, std::size_t row, std::vector<char>& taken,
               std::vector<std::size_t>& partner, std::vector<std::size_t>& best,
               double& best_cost) {
  if (row == c.rows()) {
    const double total = row_order_sum(c, partner);
    if (total < best_cost) {
      best_cost = total;
      best = partner;
    }
    return;
  }
  for (std::size_t j = 0; j < c.cols(); ++j) {
    if (taken[j]) continue;
    taken[j] = 1;
    partner[row] = j;
    enumerate(c, row + 1, taken, partner, best, best_cost);
    taken[j] = 0;
  }
}

}  // namespace

Assignment min_cost_assignment(const CostMatrix& cost) {
  if (cost.empty()) return {};
  require_finite(cost);
  const bool transpose = cost.rows() > cost.cols();
  const CostMatrix c = transpose ? cost.transposed() : cost;
  return to_assignment(c, lex_min_optimal(c), transpose);
}

Assignment brute_force_assignment(const CostMatrix& cost) {
  if (cost.empty()) return {};
  if (std::min(cost.rows(), cost.cols()) > kBruteForceLimit)
    throw Error(Errc::range, "brute-force assignment is limited to " +
                                 std::to_string(kBruteForceLimit) + " on the smaller side");
  require_finite(cost);
  const bool transpose = cost.rows() > cost.cols();
  const CostMatrix c = transpose ? cost.transposed() : cost;
  std::vector<char> taken(c.cols(), 0);
  std::vector<std::size_t> partner(c.rows()), best;
  double best_cost = kInf;
  enumerate(c, 0, taken, partner, best, best_cost);
  return to_assignment(c, best, transpose);
}

}  // namespace panopose
