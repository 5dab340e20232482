#include "restore/net_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "restore/error.hpp"

namespace restore {

namespace {

template <class Node>
std::unordered_map<int, int> build_index(const std::vector<Node>& nodes, const char* what) {
  std::unordered_map<int, int> index;
  index.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].id, static_cast<int>(i)).second) {
      throw ConfigError(std::string(what) + ": duplicate node id " + std::to_string(nodes[i].id));
    }
  }
  return index;
}

int lookup(const std::unordered_map<int, int>& index, int id, const char* what) {
  auto it = index.find(id);
  if (it == index.end()) {
    throw ConfigError(std::string(what) + ": unknown node id " + std::to_string(id));
  }
  return it->second;
}

std::vector<bool> reach(const std::vector<std::vector<Arc>>& adj, int start) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const Arc& a : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(a.to)]) {
        seen[static_cast<std::size_t>(a.to)] = true;
        stack.push_back(a.to);
      }
    }
  }
  return seen;
}

}  // namespace

PowerNetwork::PowerNetwork(std::vector<PowerNode> nodes, std::vector<PowerEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  index_ = build_index(nodes_, "power network");
  adjacency_.resize(nodes_.size());
  for (const PowerEdge& e : edges_) {
    int a = lookup(index_, e.from, "power edge");
    int b = lookup(index_, e.to, "power edge");
    if (a == b) continue;
    adjacency_[static_cast<std::size_t>(a)].push_back(b);
    adjacency_[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  for (const PowerNode& n : nodes_) p_max_ += n.load_kw;
}

std::optional<int> PowerNetwork::index_of(int id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int PowerNetwork::require_index(int id) const { return lookup(index_, id, "power network"); }

TransportNetwork::TransportNetwork(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  index_ = build_index(nodes_, "road network");
  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  for (const RoadEdge& e : edges_) {
    int a = lookup(index_, e.from, "road edge");
    int b = lookup(index_, e.to, "road edge");
    if (a == b) continue;
    auto& out = out_[static_cast<std::size_t>(a)];
    auto it = std::find_if(out.begin(), out.end(), [b](const Arc& arc) { return arc.to == b; });
    if (it == out.end()) {
      out.push_back({b, e.travel_time_h});
    } else {
      it->hours = std::min(it->hours, e.travel_time_h);
    }
  }
  for (std::size_t a = 0; a < out_.size(); ++a) {
    auto& out = out_[a];
    std::sort(out.begin(), out.end(), [](const Arc& l, const Arc& r) { return l.to < r.to; });
    for (const Arc& arc : out) in_[static_cast<std::size_t>(arc.to)].push_back({static_cast<int>(a), arc.hours});
  }
}

std::optional<int> TransportNetwork::index_of(int id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int TransportNetwork::require_index(int id) const { return lookup(index_, id, "road network"); }

std::optional<double> TransportNetwork::arc_hours(int from_index, int to_index) const {
  for (const Arc& a : out_arcs(from_index)) {
    if (a.to == to_index) return a.hours;
  }
  return std::nullopt;
}

bool TransportNetwork::strongly_connected() const {
  if (nodes_.empty()) return true;
  auto fwd = reach(out_, 0);
  auto bwd = reach(in_, 0);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

Coupling couple_networks(const PowerNetwork& power, const TransportNetwork& roads) {
  if (roads.size() == 0) throw ConfigError("couple_networks: empty road network");
  if (power.size() == 0) throw ConfigError("couple_networks: empty power network");
  Coupling c;
  c.road_id.reserve(power.size());
  c.road_index.reserve(power.size());
  for (const PowerNode& p : power.nodes()) {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < roads.size(); ++r) {
      const RoadNode& rn = roads.nodes()[r];
      double dx = rn.x - p.x;
      double dy = rn.y - p.y;
      double d2 = dx * dx + dy * dy;
      if (d2 < best_d2 || (d2 == best_d2 && rn.id < roads.node(best).id)) {
        best = static_cast<int>(r);
        best_d2 = d2;
      }
    }
    c.road_index.push_back(best);
    c.road_id.push_back(roads.node(best).id);
  }
  return c;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> v;
  auto say = [&v](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    v.push_back(os.str());
  };

  const PowerNetwork& pn = s.power;
  if (pn.size() == 0) say("power network empty");
  int sources = 0;
  for (const PowerNode& n : pn.nodes()) {
    if (!(n.load_kw >= 0.0) || !std::isfinite(n.load_kw)) say("power node ", n.id, ": negative or non-finite load");
    if (n.is_source) {
      ++sources;
      if (n.load_kw != 0.0) say("power node ", n.id, ": source carries load");
    }
  }
  if (pn.size() > 0 && sources == 0) say("power network has no source");
  for (const PowerEdge& e : pn.edges()) {
    if (e.from == e.to) say("power edge ", e.from, "-", e.to, ": self-loop");
  }
  if (pn.size() > 0) {
    std::vector<bool> seen(pn.size(), false);
    std::vector<int> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : pn.neighbors(u)) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          ++count;
          stack.push_back(w);
        }
      }
    }
    if (count != pn.size()) say("power network disconnected");
  }

  const TransportNetwork& rn = s.roads;
  if (rn.size() == 0) say("road network empty");
  for (const RoadEdge& e : rn.edges()) {
    if (!(e.travel_time_h > 0.0) || !std::isfinite(e.travel_time_h)) {
      say("road edge ", e.from, "->", e.to, ": non-positive travel time");
    }
  }
  if (rn.size() > 0 && !rn.strongly_connected()) say("road network not strongly connected");

  for (int d : s.depots) {
    if (!rn.index_of(d)) say("depot ", d, ": unknown road node");
  }

  if (s.coupling.road_index.size() != pn.size()) {
    say("coupling does not cover every power node");
  } else if (rn.size() > 0 && pn.size() > 0) {
    Coupling expect = couple_networks(pn, rn);
    for (std::size_t i = 0; i < pn.size(); ++i) {
      if (expect.road_id[i] != s.coupling.road_id[i]) {
        say("coupling of power node ", pn.nodes()[i].id, ": not the nearest road node");
      }
    }
  }

  const EpisodeConfig& c = s.config;
  if (c.n_crews < 1) say("config: n_crews < 1");
  if (c.n_depots < 1) say("config: n_depots < 1");
  if (c.n_damaged < 0) say("config: n_damaged < 0");
  if (c.horizon_steps < 1) say("config: horizon_steps < 1");
  if (!(c.step_hours > 0.0)) say("config: step_hours must be positive");
  if (c.crew_capacity < 1) say("config: crew_capacity < 1");
  if (static_cast<std::size_t>(c.n_depots) != s.depots.size()) {
    say("config: n_depots=", c.n_depots, " but ", s.depots.size(), " depots listed");
  }
  std::size_t eligible = 0;
  for (const PowerNode& n : pn.nodes()) eligible += n.is_source ? 0 : 1;
  if (c.n_damaged >= 0 && static_cast<std::size_t>(c.n_damaged) > eligible) {
    say("config: n_damaged=", c.n_damaged, " exceeds ", eligible, " non-source power nodes");
  }
  return v;
}

Scenario make_scenario(PowerNetwork power, TransportNetwork roads, std::vector<int> depots,
                       EpisodeConfig config) {
  Scenario s;
  s.coupling = couple_networks(power, roads);
  s.power = std::move(power);
  s.roads = std::move(roads);
  s.depots = std::move(depots);
  s.config = config;
  auto violations = validate_scenario(s);
  if (!violations.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ConfigError(msg);
  }
  return s;
}

}  // namespace restore
