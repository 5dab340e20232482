#include <gtest/gtest.h>

#include <random>

#include "restore/error.hpp"
#include "restore/matching.hpp"
#include "matching_oracle.hpp"

using namespace restore;

TEST(Matching, TwoByTwo) {
  IncentiveMatrix w(2, 2);
  w(0, 0) = 1, w(0, 1) = 2, w(1, 0) = 3, w(1, 1) = 5;
  PermissionMask m(2, 2, 1);
  auto a = max_weight_matching(w, m);
  EXPECT_EQ(a.pairs, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
  EXPECT_EQ(assignment_weight(w, a), 6.0);
}

TEST(Matching, NegativeWeightStillAssigned) {
  IncentiveMatrix w(1, 1, -7.0);
  PermissionMask m(1, 1, 1);
  EXPECT_EQ(max_weight_matching(w, m).pairs, (std::vector<std::pair<int, int>>{{0, 0}}));
}

TEST(Matching, MaskForcesColumn) {
  IncentiveMatrix w(1, 2, 9.0);
  PermissionMask m(1, 2, 1);
  m(0, 0) = 0;
  EXPECT_EQ(max_weight_matching(w, m).pairs, (std::vector<std::pair<int, int>>{{0, 1}}));
}

TEST(Matching, CardinalityBeatsWeight) {
  // Crew 0 alone on column 0 would earn 100; taking column 1 lets crew 1 work.
  IncentiveMatrix w(2, 2, 0.0);
  w(0, 0) = 100, w(0, 1) = -50, w(1, 0) = -50;
  PermissionMask m(2, 2, 1);
  m(1, 1) = 0;
  auto a = max_weight_matching(w, m);
  EXPECT_EQ(a.pairs.size(), 2u);
}

TEST(Matching, EmptyAndFullyMasked) {
  EXPECT_TRUE(max_weight_matching(IncentiveMatrix(0, 3), PermissionMask(0, 3)).pairs.empty());
  EXPECT_TRUE(max_weight_matching(IncentiveMatrix(3, 0), PermissionMask(3, 0)).pairs.empty());
  EXPECT_TRUE(max_weight_matching(IncentiveMatrix(2, 2, 1.0), PermissionMask(2, 2, 0)).pairs.empty());
}

TEST(Matching, Errors) {
  EXPECT_THROW(max_weight_matching(IncentiveMatrix(2, 2), PermissionMask(2, 3)), ContractError);
  IncentiveMatrix w(1, 1, std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(max_weight_matching(w, PermissionMask(1, 1, 1)), ContractError);
  // A forbidden NaN is never read.
  EXPECT_NO_THROW(max_weight_matching(w, PermissionMask(1, 1, 0)));
}

TEST(Matching, AgreesWithEnumerationOnRandomReals) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    auto [w, m] = matching_oracle::random_instance(rng, 6, 7, false);
    auto want = matching_oracle::brute_force(w, m);
    auto got = max_weight_matching(w, m);
    ASSERT_TRUE(matching_oracle::conflict_free(got, m));
    ASSERT_EQ(got.pairs.size(), want.pairs.size());
    ASSERT_EQ(assignment_weight(w, got), assignment_weight(w, want));
  }
}

TEST(Matching, TieBreakIsLexicographic) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    auto [w, m] = matching_oracle::random_instance(rng, 5, 6, true);
    auto want = matching_oracle::brute_force(w, m);
    auto got = max_weight_matching(w, m);
    ASSERT_EQ(got.pairs, want.pairs) << "trial " << trial;
  }
}
