// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <doctest.h>

#include "panopose/error.hpp"
#include "panopose/metrics.hpp"

using namespace panopose;

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

TEST_CASE("small assignment examples") {
  const auto one = min_cost_assignment(CostMatrix{{0.0}});
  CHECK(one.total_cost == 0.0);
  CHECK(one.pairs == Pairs{{0, 0}});

  const CostMatrix m{{1, 2}, {2, 4}};
  const auto a = min_cost_assignment(m);
  CHECK(a.total_cost == 4.0);
  CHECK(a.pairs == Pairs{{0, 1}, {1, 0}});
  CHECK(brute_force_assignment(m).total_cost == 4.0);

  const CostMatrix diag{{0, 3, 3}, {3, 0, 3}, {3, 3, 0}};
  CHECK(min_cost_assignment(diag).pairs == Pairs{{0, 0}, {1, 1}, {2, 2}});

  const auto row = min_cost_assignment(CostMatrix{{5, 1, 3}});
  CHECK(row.pairs == Pairs{{0, 1}});
  CHECK(row.total_cost == 1.0);

  const auto col = min_cost_assignment(CostMatrix{{5}, {1}, {3}});
  CHECK(col.pairs == Pairs{{1, 0}});

  CHECK(min_cost_assignment(CostMatrix{}).pairs.empty());
  CHECK(min_cost_assignment(CostMatrix(0, 3)).total_cost == 0.0);
}

TEST_CASE("ties resolve to the lexicographically smallest assignment") {
  const CostMatrix flat(3, 3, 1.0);
  CHECK(min_cost_assignment(flat).pairs == Pairs{{0, 0}, {1, 1}, {2, 2}});
  const CostMatrix tie{{1, 1}, {1, 1}, {0, 0}};
  CHECK(min_cost_assignment(tie).pairs == brute_force_assignment(tie).pairs);
}

TEST_CASE("assignment errors") {
  CostMatrix bad(2, 2, 0.0);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(min_cost_assignment(bad), Error);
  CHECK_THROWS_AS(brute_force_assignment(CostMatrix(9, 9, 1.0)), Error);
  CHECK_NOTHROW(brute_force_assignment(CostMatrix(2, 12, 1.0)));
}

TEST_CASE("matches exhaustive enumeration on random matrices") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> real(0.0, 10.0);
  std::uniform_int_distribution<int> small(0, 3);
  std::uniform_int_distribution<std::size_t> dim(0, 7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto r = dim(rng), c = dim(rng);
    CostMatrix m(r, c);
    const bool integer = trial % 2 == 0;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = integer ? small(rng) : real(rng);
    const auto fast = min_cost_assignment(m);
    const auto slow = brute_force_assignment(m);
    CHECK(fast.total_cost == slow.total_cost);
    CHECK(fast.pairs == slow.pairs);
    CHECK(fast.pairs.size() == std::min(r, c));
  }
}
