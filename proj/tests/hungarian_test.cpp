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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "dcl/rng.hpp"
#include "oracles.hpp"

namespace dcl {
namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

TEST(Hungarian, ZeroDiagonal) {
  const auto a = hungarian_match({{0, 9}, {9, 0}});
  EXPECT_EQ(a.pairs, (Pairs{{0, 0}, {1, 1}}));
  EXPECT_EQ(a.total_cost, 0.0);
}

TEST(Hungarian, TwoByTwoOptimum) {
  const auto a = hungarian_match({{1, 2}, {2, 1}});
  EXPECT_EQ(a.pairs, (Pairs{{0, 0}, {1, 1}}));
  EXPECT_EQ(a.total_cost, 2.0);
}

TEST(Hungarian, SingleRow) {
  const auto a = hungarian_match({{5, 1, 3}});
  EXPECT_EQ(a.pairs, (Pairs{{0, 1}}));
  EXPECT_EQ(a.total_cost, 1.0);
}

TEST(Hungarian, TallMatrix) {
  const auto a = hungarian_match({{4}, {2}, {7}});
  EXPECT_EQ(a.pairs, (Pairs{{1, 0}}));
  EXPECT_EQ(a.total_cost, 2.0);
}

TEST(Hungarian, EmptyMatrix) {
  const auto a = hungarian_match(CostMatrix{});
  EXPECT_TRUE(a.pairs.empty());
  EXPECT_EQ(a.total_cost, 0.0);
  EXPECT_TRUE(hungarian_match(CostMatrix(0, 4)).pairs.empty());
}

TEST(Hungarian, TiesPreferLowIndices) {
  const auto a = hungarian_match(CostMatrix(3, 3, 1.0));
  EXPECT_EQ(a.pairs, (Pairs{{0, 0}, {1, 1}, {2, 2}}));
  const auto b = hungarian_match({{1, 1, 5}, {1, 1, 5}});
  EXPECT_EQ(b.pairs, (Pairs{{0, 0}, {1, 1}}));
}

TEST(Hungarian, RejectsNonFinite) {
  CostMatrix c(2, 2, 1.0);
  c(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(hungarian_match(c), std::invalid_argument);
  c(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(hungarian_match(c), std::invalid_argument);
}

TEST(HungarianProperty, MatchesBruteForceAndIsOneToOne) {
  Rng rng(21);
  for (int trial = 0; trial < 600; ++trial) {
    const auto rows = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto cols = static_cast<std::size_t>(rng.uniform_int(1, 6));
    CostMatrix c(rows, cols);
    const bool integer = trial % 3 == 0;  // small integers force many ties
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t k = 0; k < cols; ++k)
        c(r, k) = integer ? rng.uniform_int(0, 3) : rng.uniform(-2.0, 5.0);
    const auto a = hungarian_match(c);
    EXPECT_NEAR(a.total_cost, testing::brute_force_min_cost(c), 1e-9);
    ASSERT_EQ(a.pairs.size(), std::min(rows, cols));
    std::set<std::size_t> rs, cs;
    double sum = 0.0;
    for (auto [r, k] : a.pairs) {
      rs.insert(r);
      cs.insert(k);
      sum += c(r, k);
    }
    EXPECT_EQ(rs.size(), a.pairs.size());
    EXPECT_EQ(cs.size(), a.pairs.size());
    EXPECT_NEAR(sum, a.total_cost, 1e-12);
  }
}

}  // namespace
}  // namespace dcl
