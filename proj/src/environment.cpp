#include "restore/environment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "restore/error.hpp"
#include "restore/power_served.hpp"

namespace restore {

int EnvState::n_repaired() const {
  return static_cast<int>(std::count_if(damaged_states.begin(), damaged_states.end(),
                                        [](const DamagedNodeState& d) { return !d.damaged; }));
}

std::size_t ObservationGraph::n_relations() const {
  return static_cast<std::size_t>(n_crews) * static_cast<std::size_t>(n_targets);
}

double clamp_repair_time(double raw_hours) { return std::clamp(raw_hours, kRepairMinHours, kRepairMaxHours); }

double sample_repair_time(Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  return clamp_repair_time(std::exp(kRepairLogMean + kRepairLogSigma * z(rng)));
}

double budget_from_draw(double z, double step_hours) { return std::max(0.0, z) * step_hours; }

double crew_time_budget(Rng& rng, double step_hours) {
  std::normal_distribution<double> z(kBudgetMean, kBudgetSigma);
  return budget_from_draw(z(rng), step_hours);
}

double compute_reward(double p, double p_init, double p_max, double step_hours, double episode_hours) {
  const double weight = step_hours / episode_hours;
  if (!(p_max > p_init)) return weight;
  return (p - p_init) / (p_max - p_init) * weight;
}

namespace {

void refresh_power(EnvState& s) {
  const PowerNetwork& pn = s.scenario->power;
  auto on = energized_mask(pn, s.damaged_mask);
  s.p_current = served_kw(pn, on);
  for (DamagedNodeState& d : s.damaged_states) {
    d.adjacent_energized = false;
    if (!d.damaged) continue;
    for (int w : pn.neighbors(d.power_index)) {
      if (on[static_cast<std::size_t>(w)]) {
        d.adjacent_energized = true;
        break;
      }
    }
  }
}

void release(EnvState& s, CrewState& crew) {
  if (!s.is_depot(crew.target)) {
    s.damaged_states[static_cast<std::size_t>(crew.target - s.n_depots())].assigned_crew = -1;
  }
  crew.target = -1;
  crew.route.clear();
  crew.route_pos = 0;
}

// Returns true if a node was repaired.
bool arrive(EnvState& s, CrewState& crew, double budget) {
  const int cap = s.config().crew_capacity;
  if (s.is_depot(crew.target)) {
    s.resources_dispensed += cap - crew.cargo;
    crew.cargo = cap;
    release(s, crew);
    return false;
  }
  DamagedNodeState& d = s.damaged_states[static_cast<std::size_t>(crew.target - s.n_depots())];
  if (!d.damaged) {
    release(s, crew);
    return false;
  }
  if (d.resources_required > 0) {
    int drop = std::min(crew.cargo, d.resources_required);
    crew.cargo -= drop;
    d.resources_required -= drop;
    d.resources_on_site += drop;
    if (d.resources_required > 0) {
      release(s, crew);
      return false;
    }
  }
  d.repair_time_remaining -= budget;
  if (d.repair_time_remaining > 1e-12) return false;
  d.repair_time_remaining = 0.0;
  d.damaged = false;
  s.damaged_mask[static_cast<std::size_t>(d.power_index)] = false;
  release(s, crew);
  return true;
}

bool advance_crew(EnvState& s, CrewState& crew, double budget) {
  if (!crew.assigned()) return false;
  const TransportNetwork& roads = s.scenario->roads;
  while (crew.route_pos + 1 < crew.route.size()) {
    int from = crew.route[crew.route_pos];
    int to = crew.route[crew.route_pos + 1];
    double w = *roads.arc_hours(from, to);
    double left = (1.0 - crew.position.fraction) * w;
    if (budget >= left) {
      budget -= left;
      ++crew.route_pos;
      crew.position = CrewPosition{to, -1, 0.0};
    } else {
      crew.position.next = to;
      crew.position.fraction += budget / w;
      return false;
    }
  }
  return arrive(s, crew, budget);
}

void assign(EnvState& s, int c, int t) {
  CrewState& crew = s.crews[static_cast<std::size_t>(c)];
  crew.target = t;
  const PoiMatrix& poi = *s.poi;
  crew.route = route_indices(s.scenario->roads, crew.position.node, poi.poi_road_index(static_cast<std::size_t>(t)),
                             poi.dist_field(static_cast<std::size_t>(t)));
  crew.route_pos = 0;
  if (!s.is_depot(t)) s.damaged_states[static_cast<std::size_t>(t - s.n_depots())].assigned_crew = c;
}

StepResult advance(EnvState& s, const Assignment& assignment) {
  const EpisodeConfig& cfg = s.config();
  StepResult out;
  out.reward = compute_reward(s.p_current, s.p_init, s.p_max, cfg.step_hours, cfg.episode_hours());
  const double t = s.reward_sum + out.reward;
  if (std::abs(s.reward_sum) >= std::abs(out.reward))
    s.reward_carry += (s.reward_sum - t) + out.reward;
  else
    s.reward_carry += (out.reward - t) + s.reward_sum;
  s.reward_sum = t;
  for (auto [c, t] : assignment.pairs) assign(s, c, t);
  out.assigned = assignment;

  bool repaired = false;
  for (CrewState& crew : s.crews) {
    double budget = s.options.deterministic ? cfg.step_hours : crew_time_budget(s.budget_rng, cfg.step_hours);
    repaired |= advance_crew(s, crew, budget);
  }
  if (repaired) refresh_power(s);
  ++s.step_index;
  out.done = s.done();
  return out;
}

void require_running(const EnvState& s) {
  if (s.done()) throw ContractError("step: episode already finished");
}

}  // namespace

EnvState reset(std::shared_ptr<const Scenario> scenario, std::uint64_t episode_seed, EnvOptions options) {
  if (!scenario) throw ContractError("reset: null scenario");
  const Scenario& sc = *scenario;
  const EpisodeConfig& cfg = sc.config;
  const PowerNetwork& pn = sc.power;

  std::vector<int> eligible;
  for (std::size_t i = 0; i < pn.size(); ++i) {
    if (!pn.nodes()[i].is_source) eligible.push_back(static_cast<int>(i));
  }
  if (cfg.n_damaged < 0 || static_cast<std::size_t>(cfg.n_damaged) > eligible.size()) {
    throw ConfigError("reset: n_damaged=" + std::to_string(cfg.n_damaged) + " but only " +
                      std::to_string(eligible.size()) + " non-source power nodes");
  }
  if (sc.depots.empty()) throw ConfigError("reset: scenario has no depots");

  EnvState s;
  s.scenario = scenario;
  s.options = options;
  s.episode_seed = episode_seed;

  Rng damage_rng = make_stream(episode_seed, Stream::damage);
  for (std::size_t k = 0; k < static_cast<std::size_t>(cfg.n_damaged); ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, eligible.size() - 1);
    std::swap(eligible[k], eligible[pick(damage_rng)]);
  }
  std::vector<int> chosen(eligible.begin(), eligible.begin() + cfg.n_damaged);
  std::sort(chosen.begin(), chosen.end());

  Rng repair_rng = make_stream(episode_seed, Stream::repair_time);
  Rng resource_rng = make_stream(episode_seed, Stream::resources);
  std::uniform_int_distribution<int> need(1, cfg.crew_capacity);
  s.damaged_mask.assign(pn.size(), false);
  for (int idx : chosen) {
    DamagedNodeState d;
    d.power_index = idx;
    d.power_id = pn.node(idx).id;
    d.road_index = sc.coupling.road_index[static_cast<std::size_t>(idx)];
    d.repair_time_initial = sample_repair_time(repair_rng);
    d.repair_time_remaining = d.repair_time_initial;
    d.resources_initial = need(resource_rng);
    d.resources_required = d.resources_initial;
    s.damaged_mask[static_cast<std::size_t>(idx)] = true;
    s.damaged_states.push_back(d);
  }

  std::vector<int> pois = sc.depots;
  for (const DamagedNodeState& d : s.damaged_states) pois.push_back(sc.roads.node(d.road_index).id);
  s.poi = std::make_shared<const PoiMatrix>(sc.roads, std::move(pois));

  for (int c = 0; c < cfg.n_crews; ++c) {
    CrewState crew;
    crew.id = c;
    crew.position.node = s.poi->poi_road_index(static_cast<std::size_t>(c % s.n_depots()));
    crew.cargo = cfg.crew_capacity;
    s.crews.push_back(std::move(crew));
  }

  s.p_max = pn.p_max();
  std::vector<bool> solo(pn.size(), false);
  for (DamagedNodeState& d : s.damaged_states) {
    solo[static_cast<std::size_t>(d.power_index)] = true;
    d.power_lost_solo = s.p_max - served_kw(pn, energized_mask(pn, solo));
    solo[static_cast<std::size_t>(d.power_index)] = false;
  }
  refresh_power(s);
  s.p_init = s.p_current;
  s.budget_rng = make_stream(episode_seed, Stream::budget);
  return s;
}

StepResult step(EnvState& state, const IncentiveMatrix& incentives) {
  require_running(state);
  if (incentives.rows() != static_cast<std::size_t>(state.n_crews()) ||
      incentives.cols() != static_cast<std::size_t>(state.n_targets())) {
    throw ContractError("step: incentive matrix is " + std::to_string(incentives.rows()) + "x" +
                        std::to_string(incentives.cols()) + ", expected " + std::to_string(state.n_crews()) + "x" +
                        std::to_string(state.n_targets()));
  }
  PermissionMask mask = preprocess_mask(state);
  return advance(state, max_weight_matching(incentives, mask));
}

StepResult step_with_assignment(EnvState& state, const Assignment& assignment) {
  require_running(state);
  PermissionMask mask = preprocess_mask(state);
  std::vector<char> crew_used(static_cast<std::size_t>(state.n_crews()), 0);
  std::vector<char> target_used(static_cast<std::size_t>(state.n_targets()), 0);
  for (auto [c, t] : assignment.pairs) {
    if (c < 0 || c >= state.n_crews() || t < 0 || t >= state.n_targets()) {
      throw ContractError("step_with_assignment: pair out of range");
    }
    auto cu = static_cast<std::size_t>(c);
    auto tu = static_cast<std::size_t>(t);
    if (!mask(cu, tu)) {
      throw ContractError("step_with_assignment: crew " + std::to_string(c) + " may not take target " +
                          std::to_string(t));
    }
    if (crew_used[cu] || target_used[tu]) throw ContractError("step_with_assignment: conflicting pairs");
    crew_used[cu] = target_used[tu] = 1;
  }
  Assignment sorted = assignment;
  std::sort(sorted.pairs.begin(), sorted.pairs.end());
  return advance(state, sorted);
}

ObservationGraph build_observation(const EnvState& s) {
  ObservationGraph g;
  g.n_crews = s.n_crews();
  g.n_depots = s.n_depots();
  g.n_targets = s.n_targets();
  g.episode_hours = s.config().episode_hours();
  g.p_max = s.p_max;
  g.crew_capacity = s.config().crew_capacity;

  const auto nc = static_cast<std::size_t>(g.n_crews);
  const auto nt = static_cast<std::size_t>(g.n_targets);
  g.nodes.reserve(nc + nt + nc * nt);
  for (const CrewState& crew : s.crews) {
    ObsNode n{NodeKind::crew, crew.id, {}};
    n.features[0] = crew.cargo;
    g.nodes.push_back(n);
  }
  for (int t = 0; t < g.n_depots; ++t) g.nodes.push_back(ObsNode{NodeKind::depot, t, {}});
  for (std::size_t k = 0; k < s.damaged_states.size(); ++k) {
    const DamagedNodeState& d = s.damaged_states[k];
    ObsNode n{NodeKind::damaged, g.n_depots + static_cast<int>(k), {}};
    n.features = {d.damaged ? 1.0 : 0.0, static_cast<double>(d.resources_required), d.repair_time_remaining,
                  d.power_lost_solo, d.adjacent_energized ? 1.0 : 0.0};
    g.nodes.push_back(n);
  }
  const TransportNetwork& roads = s.scenario->roads;
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t t = 0; t < nt; ++t) {
      ObsNode n{NodeKind::relation, -1, {}};
      n.features[0] = remaining_time_from_position(roads, s.crews[c].position, t, *s.poi);
      auto r = static_cast<int>(g.nodes.size());
      g.nodes.push_back(n);
      g.edges.emplace_back(r, static_cast<int>(c));
      g.edges.emplace_back(r, static_cast<int>(nc + t));
    }
  }
  return g;
}

bool needs_decision(const EnvState& state) {
  PermissionMask m = preprocess_mask(state);
  for (char v : m.data())
    if (v) return true;
  return false;
}

double run_episode(EnvState& state, const Policy& policy, std::vector<TraceRow>* trace) {
  const double start = state.cumulative_reward();
  while (!state.done()) {
    TraceRow row;
    row.step = state.step_index;
    row.p_current_kw = state.p_current;
    row.n_repaired = state.n_repaired();
    StepResult r = needs_decision(state)
                       ? step(state, policy(build_observation(state)))
                       : step(state, IncentiveMatrix(static_cast<std::size_t>(state.n_crews()),
                                                     static_cast<std::size_t>(state.n_targets()), 0.0));
    if (trace) {
      row.reward = r.reward;
      row.cumulative_reward = state.cumulative_reward();
      trace->push_back(row);
    }
  }
  return state.cumulative_reward() - start;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "step,p_current_kw,reward,cumulative_reward,n_repaired\n";
  auto old = os.precision(17);
  for (const TraceRow& r : rows) {
    os << r.step << ',' << r.p_current_kw << ',' << r.reward << ',' << r.cumulative_reward << ',' << r.n_repaired
       << '\n';
  }
  os.precision(old);
}

}  // namespace restore
