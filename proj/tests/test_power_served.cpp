#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "restore/error.hpp"
#include "restore/power_served.hpp"

using namespace restore;
using namespace testing_util;

namespace {

// Fixed-point reachability over the edge list, independent of the adjacency
// the library builds.
double reachable_load(const PowerNetwork& p, const std::vector<int>& damaged_ids) {
  std::vector<char> dmg(p.size(), 0), on(p.size(), 0);
  for (int id : damaged_ids) dmg[static_cast<std::size_t>(p.require_index(id))] = 1;
  for (std::size_t i = 0; i < p.size(); ++i) on[i] = p.nodes()[i].is_source && !dmg[i];
  for (bool changed = true; changed;) {
    changed = false;
    for (const PowerEdge& e : p.edges()) {
      auto a = static_cast<std::size_t>(p.require_index(e.from));
      auto b = static_cast<std::size_t>(p.require_index(e.to));
      for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
        if (on[x] && !on[y] && !dmg[y]) on[y] = changed = true;
      }
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (on[i]) total += p.nodes()[i].load_kw;
  return total;
}

}  // namespace

TEST(ComputeServed, NoDamageServesEverything) {
  auto p = chain_power({10, 20});
  EXPECT_EQ(compute_served(p, {}).served_kw, p.p_max());
}

TEST(ComputeServed, ChainExamples) {
  auto p = chain_power({10, 20});  // S=0, A=1, B=2
  std::vector<int> a{1}, b{2};
  EXPECT_EQ(compute_served(p, a).served_kw, 0.0);
  EXPECT_EQ(compute_served(p, b).served_kw, 10.0);
  EXPECT_EQ(compute_served(p, b).energized, (std::vector<int>{0, 1}));
}

TEST(ComputeServed, MatchesReachabilityOnRandomTrees) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    auto p = random_radial(2 + trial % 11, rng);
    std::vector<int> dmg;
    std::bernoulli_distribution hit(0.3);
    for (int i = 1; i < static_cast<int>(p.size()); ++i)
      if (hit(rng)) dmg.push_back(i);
    EXPECT_DOUBLE_EQ(compute_served(p, dmg).served_kw, reachable_load(p, dmg));
  }
}

TEST(PowerLost, Examples) {
  PowerNetwork p({{0, 0, 0, 0, true}, {1, 0, 0, 7, false}, {2, 0, 0, 5, false}, {3, 0, 0, 0, false}},
                 {{0, 1}, {1, 2}, {0, 3}});
  EXPECT_DOUBLE_EQ(power_lost_if_only(p, 2), 5.0);   // leaf
  EXPECT_DOUBLE_EQ(power_lost_if_only(p, 3), 0.0);   // zero-load leaf
  auto chain = chain_power({3, 4, 5});
  EXPECT_DOUBLE_EQ(power_lost_if_only(chain, 1), chain.p_max());
}

TEST(AdjacentToEnergized, Examples) {
  auto p = chain_power({10, 20});
  std::vector<int> ab{1, 2};
  EXPECT_TRUE(adjacent_to_energized(p, ab, 1));
  EXPECT_FALSE(adjacent_to_energized(p, ab, 2));
  std::vector<int> none{};
  EXPECT_THROW(adjacent_to_energized(p, none, 1), ContractError);
}
