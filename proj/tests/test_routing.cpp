#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "restore/error.hpp"
#include "restore/routing.hpp"

using namespace restore;
using namespace testing_util;

namespace {

struct Best {
  double time = std::numeric_limits<double>::infinity();
  std::vector<int> ids;
};

// Depth-first enumeration of every simple path.
void enumerate(const TransportNetwork& t, int v, int target, std::vector<int>& path, std::vector<char>& on,
               double time, Best& best) {
  if (v == target) {
    std::vector<int> ids;
    for (int i : path) ids.push_back(t.node(i).id);
    if (time < best.time || (time == best.time && ids < best.ids)) best = {time, ids};
    return;
  }
  for (const RoadEdge& e : t.edges()) {
    int a = t.require_index(e.from), b = t.require_index(e.to);
    if (a != v || on[static_cast<std::size_t>(b)]) continue;
    on[static_cast<std::size_t>(b)] = 1;
    path.push_back(b);
    enumerate(t, b, target, path, on, time + e.travel_time_h, best);
    path.pop_back();
    on[static_cast<std::size_t>(b)] = 0;
  }
}

Best brute_force(const TransportNetwork& t, int from, int to) {
  Best best;
  std::vector<int> path{from};
  std::vector<char> on(t.size(), 0);
  on[static_cast<std::size_t>(from)] = 1;
  enumerate(t, from, to, path, on, 0.0, best);
  return best;
}

TransportNetwork random_digraph(std::mt19937_64& rng, int n, double p) {
  std::vector<RoadNode> nodes;
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = 10 * i + 3;
  std::shuffle(ids.begin(), ids.end(), rng);
  for (int id : ids) nodes.push_back({id, 0, 0});
  std::bernoulli_distribution has(p);
  std::uniform_int_distribution<int> w(1, 4);  // integer weights keep sums exact, so ties are real
  std::vector<RoadEdge> edges;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && has(rng)) edges.push_back({ids[a], ids[b], static_cast<double>(w(rng)), 0, 0});
  return TransportNetwork(nodes, edges);
}

}  // namespace

TEST(ShortestPath, SameNode) {
  auto p = shortest_path(line_roads(3), 1, 1);
  EXPECT_EQ(p.nodes, std::vector<int>{1});
  EXPECT_EQ(p.total_time, 0.0);
}

TEST(ShortestPath, SingleEdge) {
  TransportNetwork t({{0, 0, 0}, {1, 1, 0}}, {{0, 1, 0.5, 0, 0}});
  auto p = shortest_path(t, 0, 1);
  EXPECT_EQ(p.nodes, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(p.total_time, 0.5);
}

TEST(ShortestPath, TriangleGoesThroughMiddle) {
  TransportNetwork t({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}}, {{0, 1, 1.0, 0, 0}, {1, 2, 1.0, 0, 0}, {0, 2, 2.5, 0, 0}});
  auto p = shortest_path(t, 0, 2);
  EXPECT_EQ(p.nodes, (std::vector<int>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(p.total_time, 2.0);
  auto b = brute_force(t, 0, 2);
  EXPECT_EQ(b.ids, p.nodes);
  EXPECT_EQ(b.time, p.total_time);
}

TEST(ShortestPath, Unreachable) {
  TransportNetwork t({{0, 0, 0}, {1, 1, 0}}, {{0, 1, 1.0, 0, 0}});
  try {
    shortest_path(t, 1, 0);
    FAIL();
  } catch (const RouteError& e) {
    EXPECT_STREQ(e.what(), "no route from road node 1 to 0");
  }
}

TEST(ShortestPath, MatchesSimplePathEnumeration) {
  std::mt19937_64 rng(5);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto t = random_digraph(rng, 6, 0.4);
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        Best want = brute_force(t, a, b);
        if (!std::isfinite(want.time)) {
          EXPECT_THROW(shortest_path(t, t.node(a).id, t.node(b).id), RouteError);
          continue;
        }
        auto got = shortest_path(t, t.node(a).id, t.node(b).id);
        ASSERT_EQ(got.total_time, want.time);
        ASSERT_EQ(got.nodes, want.ids);
        ++compared;
      }
    }
  }
  EXPECT_GT(compared, 1000);
}

TEST(PoiMatrix, SingleNode) {
  PoiMatrix m(line_roads(3), {1});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.time(0, 0), 0.0);
}

TEST(PoiMatrix, LineGraph) {
  PoiMatrix m = precompute_poi_matrix(line_roads(3), {0, 1, 2});
  const double want[3][3] = {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m.time(i, j), want[i][j]);
}

TEST(PoiMatrix, AgreesWithSingleQueries) {
  auto sc = preset_scenario("desk", 3);
  std::vector<int> pois{sc->roads.node(0).id, sc->roads.node(17).id, sc->roads.node(55).id, sc->roads.node(99).id};
  PoiMatrix m(sc->roads, pois);
  for (std::size_t i = 0; i < pois.size(); ++i) {
    for (std::size_t j = 0; j < pois.size(); ++j) {
      auto p = shortest_path(sc->roads, pois[i], pois[j]);
      EXPECT_EQ(m.time(i, j), p.total_time);
      EXPECT_EQ(m.plan(sc->roads, i, j).nodes, p.nodes);
    }
  }
}

TEST(RemainingTime, AtTarget) {
  auto roads = line_roads(3);
  PoiMatrix m(roads, {2});
  EXPECT_EQ(remaining_time_from_position(roads, CrewPosition{2, -1, 0.0}, 0, m), 0.0);
}

TEST(RemainingTime, HalfwayAlongEdgeIntoTarget) {
  auto roads = line_roads(2, 2.0);
  PoiMatrix m(roads, {1});
  EXPECT_DOUBLE_EQ(remaining_time_from_position(roads, CrewPosition{0, 1, 0.5}, 0, m), 1.0);
}

TEST(RemainingTime, EdgeThenResidualPath) {
  auto roads = line_roads(5, 1.0);
  PoiMatrix m(roads, {4});
  double residual = shortest_path(roads, 1, 4).total_time;
  EXPECT_DOUBLE_EQ(residual, 3.0);
  EXPECT_DOUBLE_EQ(remaining_time_from_position(roads, CrewPosition{0, 1, 0.25}, 0, m), 0.75 + residual);
}
