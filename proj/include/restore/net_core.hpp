#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace restore {

struct PowerNode {
  int id = 0;
  double x = 0.0;  // km
  double y = 0.0;  // km
  double load_kw = 0.0;
  bool is_source = false;
};

struct PowerEdge {
  int from = 0;
  int to = 0;
};

// Distribution network: undirected, unweighted. Ids are arbitrary integers;
// algorithms work on dense indices (insertion order).
class PowerNetwork {
 public:
  PowerNetwork() = default;
  // Throws ConfigError on duplicate node ids or edges naming unknown ids.
  PowerNetwork(std::vector<PowerNode> nodes, std::vector<PowerEdge> edges);

  const std::vector<PowerNode>& nodes() const { return nodes_; }
  const std::vector<PowerEdge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }
  const PowerNode& node(int index) const { return nodes_[static_cast<std::size_t>(index)]; }

  std::optional<int> index_of(int id) const;
  int require_index(int id) const;

  // Neighbor indices, self-loops dropped, parallel lines collapsed.
  std::span<const int> neighbors(int index) const { return adjacency_[static_cast<std::size_t>(index)]; }

  // Total load of the undamaged network.
  double p_max() const { return p_max_; }

 private:
  std::vector<PowerNode> nodes_;
  std::vector<PowerEdge> edges_;
  std::unordered_map<int, int> index_;
  std::vector<std::vector<int>> adjacency_;
  double p_max_ = 0.0;
};

struct RoadNode {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct RoadEdge {
  int from = 0;
  int to = 0;
  double travel_time_h = 0.0;
  // Informational; zero when the source file only gave a travel time.
  double length_km = 0.0;
  double speed_kmh = 0.0;
};

struct Arc {
  int to = 0;  // node index
  double hours = 0.0;
};

// Directed road graph with parallel edges. Adjacency keeps only the fastest
// parallel edge per ordered pair.
class TransportNetwork {
 public:
  TransportNetwork() = default;
  TransportNetwork(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges);

  const std::vector<RoadNode>& nodes() const { return nodes_; }
  const std::vector<RoadEdge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }
  const RoadNode& node(int index) const { return nodes_[static_cast<std::size_t>(index)]; }

  std::optional<int> index_of(int id) const;
  int require_index(int id) const;

  // Sorted by head index.
  std::span<const Arc> out_arcs(int index) const { return out_[static_cast<std::size_t>(index)]; }
  std::span<const Arc> in_arcs(int index) const { return in_[static_cast<std::size_t>(index)]; }
  // Fastest parallel edge u->v, or nullopt.
  std::optional<double> arc_hours(int from_index, int to_index) const;

  bool strongly_connected() const;

 private:
  std::vector<RoadNode> nodes_;
  std::vector<RoadEdge> edges_;
  std::unordered_map<int, int> index_;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<Arc>> in_;
};

// Power node -> nearest road node.
struct Coupling {
  std::vector<int> road_id;     // by power index
  std::vector<int> road_index;  // by power index
};

struct EpisodeConfig {
  int n_crews = 1;
  int n_depots = 1;
  int n_damaged = 0;
  int horizon_steps = 48;
  double step_hours = 1.0;
  int crew_capacity = 5;
  std::uint64_t seed = 0;

  double episode_hours() const { return horizon_steps * step_hours; }
  bool operator==(const EpisodeConfig&) const = default;
};

struct Scenario {
  PowerNetwork power;
  TransportNetwork roads;
  Coupling coupling;
  std::vector<int> depots;  // road node ids
  EpisodeConfig config;
};

// Nearest road node by Euclidean distance, ties to the lowest road id.
// Throws ConfigError when either network is empty.
Coupling couple_networks(const PowerNetwork& power, const TransportNetwork& roads);

// Human-readable violations; empty iff the scenario is well formed.
std::vector<std::string> validate_scenario(const Scenario& s);

// Builds coupling and returns the scenario, throwing ConfigError listing every
// violation if validation fails.
Scenario make_scenario(PowerNetwork power, TransportNetwork roads, std::vector<int> depots,
                       EpisodeConfig config);

}  // namespace restore
