#include "restore/routing.hpp"

#include <cmath>
#include <limits>
#include <queue>

#include "restore/error.hpp"

namespace restore {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void no_route(const TransportNetwork& roads, int from_index, int to_index) {
  throw RouteError("no route from road node " + std::to_string(roads.node(from_index).id) + " to " +
                   std::to_string(roads.node(to_index).id));
}

}  // namespace

std::vector<double> times_to(const TransportNetwork& roads, int target_index) {
  std::vector<double> dist(roads.size(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(target_index)] = 0.0;
  heap.push({0.0, target_index});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(v)]) continue;
    for (const Arc& a : roads.in_arcs(v)) {
      double nd = d + a.hours;
      if (nd < dist[static_cast<std::size_t>(a.to)]) {
        dist[static_cast<std::size_t>(a.to)] = nd;
        heap.push({nd, a.to});
      }
    }
  }
  return dist;
}

std::vector<int> route_indices(const TransportNetwork& roads, int from_index, int to_index,
                               std::span<const double> dist_to_target) {
  if (!std::isfinite(dist_to_target[static_cast<std::size_t>(from_index)])) {
    no_route(roads, from_index, to_index);
  }
  std::vector<int> route{from_index};
  int v = from_index;
  while (v != to_index) {
    double here = dist_to_target[static_cast<std::size_t>(v)];
    double tol = 1e-12 * std::max(1.0, here);
    int best = -1;
    for (const Arc& a : roads.out_arcs(v)) {
      double via = a.hours + dist_to_target[static_cast<std::size_t>(a.to)];
      if (via <= here + tol && (best < 0 || roads.node(a.to).id < roads.node(best).id)) best = a.to;
    }
    if (best < 0 || route.size() > roads.size()) {
      throw std::logic_error("route_indices: inconsistent distance field");
    }
    route.push_back(best);
    v = best;
  }
  return route;
}

double route_time(const TransportNetwork& roads, std::span<const int> route) {
  double t = 0.0;
  for (std::size_t k = 1; k < route.size(); ++k) t += *roads.arc_hours(route[k - 1], route[k]);
  return t;
}

PathPlan shortest_path(const TransportNetwork& roads, int from_id, int to_id) {
  int from = roads.require_index(from_id);
  int to = roads.require_index(to_id);
  auto dist = times_to(roads, to);
  auto idx = route_indices(roads, from, to, dist);
  PathPlan plan;
  plan.total_time = route_time(roads, idx);
  plan.nodes.reserve(idx.size());
  for (int i : idx) plan.nodes.push_back(roads.node(i).id);
  return plan;
}

PoiMatrix::PoiMatrix(const TransportNetwork& roads, std::vector<int> poi_ids) {
  const std::size_t n = poi_ids.size();
  poi_index_.reserve(n);
  for (int id : poi_ids) poi_index_.push_back(roads.require_index(id));
  dist_to_.reserve(n);
  for (int j : poi_index_) dist_to_.push_back(times_to(roads, j));
  times_.assign(n * n, 0.0);
  routes_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto r = route_indices(roads, poi_index_[i], poi_index_[j], dist_to_[j]);
      times_[i * n + j] = route_time(roads, r);
      routes_[i * n + j] = std::move(r);
    }
  }
}

PathPlan PoiMatrix::plan(const TransportNetwork& roads, std::size_t i, std::size_t j) const {
  PathPlan p;
  p.total_time = time(i, j);
  for (int v : route(i, j)) p.nodes.push_back(roads.node(v).id);
  return p;
}

PoiMatrix precompute_poi_matrix(const TransportNetwork& roads, std::vector<int> poi_ids) {
  return PoiMatrix(roads, std::move(poi_ids));
}

double remaining_time_from_position(const TransportNetwork& roads, const CrewPosition& pos,
                                    std::size_t target, const PoiMatrix& matrix) {
  double t;
  if (pos.at_node()) {
    t = matrix.time_from_node(pos.node, target);
  } else {
    double w = *roads.arc_hours(pos.node, pos.next);
    t = (1.0 - pos.fraction) * w + matrix.time_from_node(pos.next, target);
  }
  if (!std::isfinite(t)) no_route(roads, pos.at_node() ? pos.node : pos.next, matrix.poi_road_index(target));
  return t;
}

}  // namespace restore
