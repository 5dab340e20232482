#pragma once

#include <memory>
#include <random>
#include <vector>

#include "restore/net_core.hpp"
#include "restore/scenario_io.hpp"

namespace testing_util {

using namespace restore;

// Source id 0, then ids 1..n in a chain with the given loads.
inline PowerNetwork chain_power(const std::vector<double>& loads) {
  std::vector<PowerNode> nodes{{0, 0.0, 0.0, 0.0, true}};
  std::vector<PowerEdge> edges;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    nodes.push_back({id, static_cast<double>(id), 0.0, loads[i], false});
    edges.push_back({id - 1, id});
  }
  return PowerNetwork(nodes, edges);
}

// Random radial tree: node i > 0 hangs off a uniformly chosen earlier node.
inline PowerNetwork random_radial(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> load(0.0, 100.0);
  std::vector<PowerNode> nodes{{0, 0.0, 0.0, load(rng), true}};
  std::vector<PowerEdge> edges;
  for (int i = 1; i < n; ++i) {
    nodes.push_back({i, static_cast<double>(i), 0.0, load(rng), false});
    std::uniform_int_distribution<int> parent(0, i - 1);
    edges.push_back({parent(rng), i});
  }
  return PowerNetwork(nodes, edges);
}

// Bidirectional line of road nodes 0..n-1 at x = id, each hop `hours`.
inline TransportNetwork line_roads(int n, double hours = 1.0) {
  std::vector<RoadNode> nodes;
  std::vector<RoadEdge> edges;
  for (int i = 0; i < n; ++i) nodes.push_back({i, static_cast<double>(i), 0.0});
  for (int i = 0; i + 1 < n; ++i) {
    edges.push_back({i, i + 1, hours, 0.0, 0.0});
    edges.push_back({i + 1, i, hours, 0.0, 0.0});
  }
  return TransportNetwork(nodes, edges);
}

// Power chain placed on top of a road line so that power node k couples to
// road node k. Depot at road node 0.
inline std::shared_ptr<const Scenario> chain_scenario(const std::vector<double>& loads, int n_damaged, int n_crews = 1,
                                                       double hop_hours = 1.0, int horizon = 48) {
  EpisodeConfig cfg;
  cfg.n_crews = n_crews;
  cfg.n_depots = 1;
  cfg.n_damaged = n_damaged;
  cfg.horizon_steps = horizon;
  return std::make_shared<const Scenario>(
      make_scenario(chain_power(loads), line_roads(static_cast<int>(loads.size()) + 1, hop_hours), {0}, cfg));
}

inline std::shared_ptr<const Scenario> preset_scenario(const std::string& name, std::uint64_t seed) {
  return std::make_shared<const Scenario>(generate_scenario(preset(name), seed));
}

}  // namespace testing_util
