#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "restore/baselines.hpp"
#include "restore/environment.hpp"
#include "restore/error.hpp"
#include "restore/power_served.hpp"

using namespace restore;
using namespace testing_util;

namespace {

std::vector<int> damaged_ids(const EnvState& s) {
  std::vector<int> ids;
  for (const auto& d : s.damaged_states)
    if (d.damaged) ids.push_back(d.power_id);
  return ids;
}

}  // namespace

TEST(RepairTime, Clamp) {
  EXPECT_EQ(clamp_repair_time(0.4), 1.0);
  EXPECT_EQ(clamp_repair_time(12.3), 8.0);
  EXPECT_EQ(clamp_repair_time(3.5), 3.5);
}

TEST(RepairTime, DrawsStayInBounds) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    double t = sample_repair_time(rng);
    ASSERT_GE(t, 1.0);
    ASSERT_LE(t, 8.0);
  }
}

TEST(Budget, FromDraw) {
  EXPECT_EQ(budget_from_draw(1.0, 1.0), 1.0);
  EXPECT_EQ(budget_from_draw(-0.2, 1.0), 0.0);
  EXPECT_EQ(budget_from_draw(1.1, 2.0), 2.2);
}

TEST(Budget, SampleMean) {
  Rng rng(2);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += crew_time_budget(rng, 1.0);
  EXPECT_NEAR(sum / n, 1.0, 3 * 0.1 / std::sqrt(static_cast<double>(n)));
}

TEST(Reward, Examples) {
  EXPECT_EQ(compute_reward(40, 40, 100, 1, 48), 0.0);
  EXPECT_DOUBLE_EQ(compute_reward(100, 40, 100, 1, 48), 1.0 / 48);
  EXPECT_DOUBLE_EQ(compute_reward(70, 40, 100, 1, 48), 0.5 / 48);
  EXPECT_DOUBLE_EQ(compute_reward(100, 100, 100, 1, 48), 1.0 / 48);
}

TEST(Reset, NoDamageIsFullReward) {
  auto sc = chain_scenario({10, 20, 30}, 0);
  EnvState s = reset(sc, 5);
  EXPECT_EQ(s.p_init, s.p_max);
  std::vector<TraceRow> trace;
  double total = run_episode(s, greedy_policy, &trace);
  ASSERT_EQ(trace.size(), 48u);
  for (const auto& row : trace) EXPECT_DOUBLE_EQ(row.reward, 1.0 / 48);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Episode, CumulativeRewardNeverExceedsOne) {
  for (int horizon : {7, 48, 49, 97, 300}) {
    auto sc = chain_scenario({10, 20}, 0, 1, 1.0, horizon);
    EnvState s = reset(sc, 1);
    const double r = run_episode(s, greedy_policy);
    EXPECT_LE(r, 1.0) << horizon;
    EXPECT_NEAR(r, 1.0, 1e-15) << horizon;
  }
}

TEST(Episode, PolicySkippedWithoutDecision) {
  auto sc = chain_scenario({5, 5, 5, 5}, 2, 1, 3.0);
  EnvState s = reset(sc, 2);
  int calls = 0, decisions = 0;
  EnvState probe = s;
  while (!probe.done()) {
    decisions += needs_decision(probe);
    step(probe, greedy_policy(build_observation(probe)));
  }
  run_episode(s, [&](const ObservationGraph& o) {
    ++calls;
    return greedy_policy(o);
  });
  EXPECT_EQ(calls, decisions);
  EXPECT_LT(calls, 48);
  EXPECT_EQ(s.cumulative_reward(), probe.cumulative_reward());
}

TEST(Reset, SameSeedSameEpisode) {
  auto sc = preset_scenario("desk", 1);
  EnvState a = reset(sc, 77), b = reset(sc, 77);
  ASSERT_EQ(damaged_ids(a), damaged_ids(b));
  for (std::size_t k = 0; k < a.damaged_states.size(); ++k) {
    EXPECT_EQ(a.damaged_states[k].repair_time_initial, b.damaged_states[k].repair_time_initial);
    EXPECT_EQ(a.damaged_states[k].resources_initial, b.damaged_states[k].resources_initial);
  }
  for (int i = 0; i < 10; ++i) EXPECT_EQ(crew_time_budget(a.budget_rng, 1.0), crew_time_budget(b.budget_rng, 1.0));
  EnvState c = reset(sc, 78);
  EXPECT_NE(damaged_ids(a), damaged_ids(c));
}

TEST(Reset, EvalOaCounts) {
  auto sc = preset_scenario("eval-oa", 7);
  EnvState s = reset(sc, 1);
  EXPECT_EQ(s.n_crews(), 2);
  EXPECT_EQ(s.n_depots(), 3);
  EXPECT_EQ(s.damaged_states.size(), 5u);
  for (const auto& c : s.crews) EXPECT_EQ(c.cargo, 5);
  for (const auto& d : s.damaged_states) {
    EXPECT_GE(d.resources_required, 1);
    EXPECT_LE(d.resources_required, 5);
    EXPECT_GE(d.repair_time_remaining, 1.0);
    EXPECT_LE(d.repair_time_remaining, 8.0);
  }
  EXPECT_DOUBLE_EQ(s.p_init, compute_served(sc->power, damaged_ids(s)).served_kw);
}

TEST(Reset, TooManyDamaged) {
  EpisodeConfig cfg;
  cfg.n_damaged = 2;
  auto sc = std::make_shared<Scenario>(make_scenario(chain_power({1, 2}), line_roads(3), {0}, cfg));
  sc->config.n_damaged = 3;
  EXPECT_THROW(reset(sc, 1), ConfigError);
}

TEST(Step, DepotArrivalRefillsAndReleases) {
  auto sc = chain_scenario({10}, 1, 1, 0.5);
  EnvState s = reset(sc, 1, EnvOptions{true});
  CrewState& crew = s.crews[0];
  crew.position = CrewPosition{1, -1, 0.0};  // 0.5 h from the depot at road node 0
  crew.cargo = 2;
  StepResult r = step_with_assignment(s, Assignment{{{0, 0}}});
  EXPECT_EQ(r.assigned.pairs.size(), 1u);
  EXPECT_EQ(s.crews[0].position.node, 0);
  EXPECT_TRUE(s.crews[0].position.at_node());
  EXPECT_EQ(s.crews[0].cargo, 5);
  EXPECT_FALSE(s.crews[0].assigned());
  EXPECT_EQ(s.resources_dispensed, 3);
  EXPECT_EQ(s.n_repaired(), 0);  // the spare half hour is not used
}

TEST(Step, DropRepairAndPowerUpdate) {
  auto sc = chain_scenario({10}, 1, 1, 0.5);
  EnvState s = reset(sc, 1, EnvOptions{true});
  DamagedNodeState& d = s.damaged_states[0];
  d.resources_required = 2;
  d.repair_time_remaining = 0.3;
  s.crews[0].position = CrewPosition{1, -1, 0.0};
  ASSERT_EQ(s.p_current, 0.0);
  step_with_assignment(s, Assignment{{{0, 1}}});
  EXPECT_EQ(s.crews[0].cargo, 3);
  EXPECT_FALSE(s.damaged_states[0].damaged);
  EXPECT_EQ(s.damaged_states[0].resources_on_site, 2);
  EXPECT_EQ(s.p_current, compute_served(sc->power, {}).served_kw);
  EXPECT_FALSE(s.crews[0].assigned());
}

TEST(Step, PartialDropReleasesCrew) {
  auto sc = chain_scenario({10}, 1, 1, 0.5);
  EnvState s = reset(sc, 1, EnvOptions{true});
  s.damaged_states[0].resources_required = 4;
  s.crews[0].position = CrewPosition{1, -1, 0.0};
  s.crews[0].cargo = 1;
  step_with_assignment(s, Assignment{{{0, 1}}});
  EXPECT_EQ(s.crews[0].cargo, 0);
  EXPECT_EQ(s.damaged_states[0].resources_required, 3);
  EXPECT_TRUE(s.damaged_states[0].damaged);
  EXPECT_FALSE(s.crews[0].assigned());
  EXPECT_EQ(s.damaged_states[0].assigned_crew, -1);
}

TEST(Step, TravelStopsMidEdge) {
  auto sc = chain_scenario({10, 10, 10}, 3, 1, 0.8);
  EnvState s = reset(sc, 1, EnvOptions{true});
  int col = s.n_depots() + 2;
  int road = s.damaged_states[2].road_index;
  ASSERT_EQ(road, 3);
  step_with_assignment(s, Assignment{{{0, col}}});
  const CrewState& c = s.crews[0];
  EXPECT_TRUE(c.assigned());
  EXPECT_EQ(c.position.node, 1);
  EXPECT_EQ(c.position.next, 2);
  EXPECT_NEAR(c.position.fraction, 0.2 / 0.8, 1e-12);
  ObservationGraph g = build_observation(s);
  // Relation (crew 0, target col): remaining 0.6 h on this edge plus the rest.
  double want = 0.6 + 0.8 * (road - 2);
  EXPECT_NEAR(g.nodes[static_cast<std::size_t>(1 + s.n_targets() + col)].features[0], want, 1e-12);
}

TEST(Step, ShapeAndFinishedErrors) {
  auto sc = chain_scenario({10}, 1, 1, 0.5, 2);
  EnvState s = reset(sc, 1);
  EXPECT_THROW(step(s, IncentiveMatrix(1, 5)), ContractError);
  step(s, IncentiveMatrix(1, 2));
  step(s, IncentiveMatrix(1, 2));
  EXPECT_TRUE(s.done());
  EXPECT_THROW(step(s, IncentiveMatrix(1, 2)), ContractError);
}

TEST(Step, RejectsForbiddenScriptedPair) {
  auto sc = chain_scenario({10}, 1, 1);
  EnvState s = reset(sc, 1);
  EXPECT_THROW(step_with_assignment(s, Assignment{{{0, 0}}}), ContractError);  // full cargo to depot
}

TEST(Mask, Rules) {
  auto sc = preset_scenario("eval-oa", 3);
  EnvState s = reset(sc, 9);
  auto fresh = preprocess_mask(s);
  for (int c = 0; c < s.n_crews(); ++c)
    for (int t = 0; t < s.n_targets(); ++t) EXPECT_EQ(bool(fresh(c, t)), !s.is_depot(t));

  s.crews[0].cargo = 0;
  auto empty = preprocess_mask(s);
  for (int t = 0; t < s.n_targets(); ++t) EXPECT_EQ(bool(empty(0, t)), s.is_depot(t));

  s.crews[0].cargo = 3;
  s.crews[1].target = 4;
  s.damaged_states[1].assigned_crew = 1;
  s.damaged_states[2].damaged = false;
  auto m = preprocess_mask(s);
  for (int t = 0; t < s.n_targets(); ++t) EXPECT_FALSE(m(1, t));  // busy crew
  EXPECT_TRUE(m(0, 0));
  EXPECT_FALSE(m(0, 4));  // taken by crew 1
  EXPECT_FALSE(m(0, 5));  // repaired
  EXPECT_TRUE(m(0, 3));
}

TEST(Observation, LayoutAndFeatures) {
  auto sc = preset_scenario("eval-oa", 3);
  EnvState s = reset(sc, 9);
  ObservationGraph g = build_observation(s);
  EXPECT_EQ(g.n_relations(), 16u);
  ASSERT_EQ(g.nodes.size(), 2u + 8u + 16u);
  EXPECT_EQ(g.edges.size(), 32u);
  EXPECT_EQ(g.nodes[0].kind, NodeKind::crew);
  EXPECT_EQ(g.nodes[2].kind, NodeKind::depot);
  EXPECT_EQ(g.nodes[5].kind, NodeKind::damaged);
  EXPECT_EQ(g.nodes[10].kind, NodeKind::relation);
  // Crew 0 starts at depot 0, crew 1 at depot 1.
  EXPECT_EQ(g.nodes[10 + 0].features[0], 0.0);
  EXPECT_EQ(g.nodes[10 + 8 + 1].features[0], 0.0);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& f = g.nodes[5 + k].features;
    EXPECT_EQ(f[0], 1.0);
    EXPECT_EQ(f[1], s.damaged_states[k].resources_required);
    EXPECT_EQ(f[3], s.damaged_states[k].power_lost_solo);
  }
  s.damaged_states[0].damaged = false;
  s.damaged_states[0].resources_required = 0;
  s.damaged_states[0].repair_time_remaining = 0.0;
  auto f = build_observation(s).nodes[5].features;
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[2], 0.0);
}

TEST(Episode, InvariantsUnderRandomPolicy) {
  std::mt19937_64 seeds(4);
  for (int trial = 0; trial < 40; ++trial) {
    auto sc = preset_scenario(trial % 2 ? "desk" : "eval-oa", seeds());
    EnvState s = reset(sc, seeds());
    Rng policy_rng(seeds());
    int initial_cargo = 0;
    for (const auto& c : s.crews) initial_cargo += c.cargo;
    double total = 0.0, last_p = s.p_current;
    while (!s.done()) {
      auto r = step(s, random_policy(build_observation(s), policy_rng));
      ASSERT_GE(r.reward, 0.0);
      total += r.reward;
      ASSERT_GE(s.p_current, last_p);  // repairs never lose load
      last_p = s.p_current;
      int cargo = 0, site = 0;
      for (const auto& c : s.crews) {
        ASSERT_GE(c.cargo, 0);
        ASSERT_LE(c.cargo, 5);
        cargo += c.cargo;
      }
      std::vector<int> holders(s.damaged_states.size(), 0);
      for (const auto& c : s.crews)
        if (c.assigned() && !s.is_depot(c.target)) ++holders[static_cast<std::size_t>(c.target - s.n_depots())];
      for (std::size_t k = 0; k < s.damaged_states.size(); ++k) {
        const auto& d = s.damaged_states[k];
        site += d.resources_on_site;
        ASSERT_LE(holders[k], 1);
        ASSERT_EQ(d.resources_on_site + d.resources_required, d.resources_initial);
        if (!d.damaged) ASSERT_EQ(d.resources_required, 0);
      }
      ASSERT_EQ(initial_cargo + s.resources_dispensed, cargo + site);
      ASSERT_DOUBLE_EQ(s.p_current, compute_served(sc->power, damaged_ids(s)).served_kw);
    }
    EXPECT_LE(total, 1.0 + 1e-12);
  }
}

TEST(Trace, CsvHeaderAndRows) {
  auto sc = chain_scenario({10, 20}, 1, 1, 0.5, 3);
  EnvState s = reset(sc, 2);
  std::vector<TraceRow> trace;
  double total = run_episode(s, greedy_policy, &trace);
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,p_current_kw,reward,cumulative_reward,n_repaired");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_EQ(trace.back().cumulative_reward, total);
}
