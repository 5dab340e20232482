#pragma once

#include <span>
#include <vector>

#include "restore/net_core.hpp"

namespace restore {

struct PathPlan {
  std::vector<int> nodes;  // road node ids, origin first
  double total_time = 0.0;  // hours
};

// Travel time from every road node to `target_index` (reverse Dijkstra).
// Unreachable nodes get +inf.
std::vector<double> times_to(const TransportNetwork& roads, int target_index);

// Fastest route by index; ties resolved toward the lexicographically smallest
// id sequence. Throws RouteError when the target is unreachable.
std::vector<int> route_indices(const TransportNetwork& roads, int from_index, int to_index,
                               std::span<const double> dist_to_target);

double route_time(const TransportNetwork& roads, std::span<const int> route);

PathPlan shortest_path(const TransportNetwork& roads, int from_id, int to_id);

// Where a crew is on the road graph. At a node when `next < 0`, otherwise on
// the edge node->next having covered `fraction` of it.
struct CrewPosition {
  int node = 0;  // index
  int next = -1;
  double fraction = 0.0;

  bool at_node() const { return next < 0; }
};

// Travel times among points of interest, with the per-POI distance fields
// needed to time crews that are between POIs.
class PoiMatrix {
 public:
  PoiMatrix() = default;
  // Throws RouteError if any ordered POI pair is unconnected.
  PoiMatrix(const TransportNetwork& roads, std::vector<int> poi_ids);

  std::size_t size() const { return poi_index_.size(); }
  double time(std::size_t i, std::size_t j) const { return times_[i * size() + j]; }
  std::span<const int> route(std::size_t i, std::size_t j) const { return routes_[i * size() + j]; }
  PathPlan plan(const TransportNetwork& roads, std::size_t i, std::size_t j) const;

  int poi_road_index(std::size_t i) const { return poi_index_[i]; }
  // Shortest time from any road node (by index) to POI j.
  double time_from_node(int road_index, std::size_t j) const {
    return dist_to_[j][static_cast<std::size_t>(road_index)];
  }
  std::span<const double> dist_field(std::size_t j) const { return dist_to_[j]; }

 private:
  std::vector<int> poi_index_;
  std::vector<double> times_;
  std::vector<std::vector<int>> routes_;
  std::vector<std::vector<double>> dist_to_;
};

PoiMatrix precompute_poi_matrix(const TransportNetwork& roads, std::vector<int> poi_ids);

// Hours for a crew at `pos` to reach POI `target`. Crews finish the edge they
// are on before turning.
double remaining_time_from_position(const TransportNetwork& roads, const CrewPosition& pos,
                                    std::size_t target, const PoiMatrix& matrix);

}  // namespace restore
