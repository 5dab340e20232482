#include "restore/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "restore/error.hpp"
#include "restore/power_served.hpp"

namespace restore {

IncentiveMatrix random_policy(const ObservationGraph& obs, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  IncentiveMatrix m(static_cast<std::size_t>(obs.n_crews), static_cast<std::size_t>(obs.n_targets));
  for (double& v : m.data()) v = z(rng);
  return m;
}

IncentiveMatrix greedy_policy(const ObservationGraph& obs) {
  const auto nc = static_cast<std::size_t>(obs.n_crews);
  const auto nt = static_cast<std::size_t>(obs.n_targets);
  IncentiveMatrix travel(nc, nt, 0.0);
  std::vector<const ObsNode*> target(nt, nullptr);
  std::vector<int> crew_of(obs.nodes.size(), -1), target_of(obs.nodes.size(), -1);
  for (std::size_t i = 0; i < obs.nodes.size(); ++i) {
    const ObsNode& n = obs.nodes[i];
    if (n.kind == NodeKind::crew) crew_of[i] = n.entity;
    if (n.kind == NodeKind::depot || n.kind == NodeKind::damaged) {
      target_of[i] = n.entity;
      target[static_cast<std::size_t>(n.entity)] = &n;
    }
  }
  std::vector<int> rel_crew(obs.nodes.size(), -1), rel_target(obs.nodes.size(), -1);
  for (auto [a, b] : obs.edges) {
    for (auto [r, o] : {std::pair{a, b}, std::pair{b, a}}) {
      auto ru = static_cast<std::size_t>(r);
      auto ou = static_cast<std::size_t>(o);
      if (obs.nodes[ru].kind != NodeKind::relation) continue;
      if (crew_of[ou] >= 0) rel_crew[ru] = crew_of[ou];
      if (target_of[ou] >= 0) rel_target[ru] = target_of[ou];
    }
  }
  for (std::size_t i = 0; i < obs.nodes.size(); ++i) {
    if (obs.nodes[i].kind != NodeKind::relation) continue;
    if (rel_crew[i] < 0 || rel_target[i] < 0) throw ContractError("greedy_policy: malformed relation node");
    travel(static_cast<std::size_t>(rel_crew[i]), static_cast<std::size_t>(rel_target[i])) = obs.nodes[i].features[0];
  }

  IncentiveMatrix omega(nc, nt, 0.0);
  double floor_value = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t t = 0; t < nt; ++t) {
      const ObsNode* tn = target[t];
      if (!tn || tn->kind != NodeKind::damaged) continue;
      const auto& f = tn->features;
      double v = f[3] / (travel(c, t) + f[2] + kGreedyEpsilon);
      omega(c, t) = v;
      if (f[0] > 0.0) floor_value = std::min(floor_value, v);
    }
  }
  if (!std::isfinite(floor_value)) floor_value = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t t = 0; t < nt; ++t) {
      if (target[t] && target[t]->kind == NodeKind::depot) {
        // 1/(b0+eps) squashed into (0, 1), shifted under the damaged columns.
        double near = 1.0 / (travel(c, t) + kGreedyEpsilon);
        omega(c, t) = floor_value - 1.0 + near / (1.0 + near);
      }
    }
  }
  return omega;
}

namespace {

// Enumerates every maximum-cardinality matching of free crews to permitted
// targets.
void enumerate_matchings(const PermissionMask& mask, const std::vector<int>& crews, std::size_t k,
                         std::vector<char>& used, Assignment& cur, std::vector<Assignment>& out, std::size_t& best) {
  if (k == crews.size()) {
    if (cur.pairs.size() > best) {
      best = cur.pairs.size();
      out.clear();
    }
    if (cur.pairs.size() == best) out.push_back(cur);
    return;
  }
  auto c = static_cast<std::size_t>(crews[k]);
  for (std::size_t t = 0; t < mask.cols(); ++t) {
    if (!mask(c, t) || used[t]) continue;
    used[t] = 1;
    cur.pairs.emplace_back(crews[k], static_cast<int>(t));
    enumerate_matchings(mask, crews, k + 1, used, cur, out, best);
    cur.pairs.pop_back();
    used[t] = 0;
  }
  if (cur.pairs.size() + (crews.size() - k - 1) >= best) {
    enumerate_matchings(mask, crews, k + 1, used, cur, out, best);
  }
}

std::vector<Assignment> candidate_matchings(const EnvState& s) {
  PermissionMask mask = preprocess_mask(s);
  std::vector<int> crews;
  for (std::size_t c = 0; c < mask.rows(); ++c) {
    for (std::size_t t = 0; t < mask.cols(); ++t) {
      if (mask(c, t)) {
        crews.push_back(static_cast<int>(c));
        break;
      }
    }
  }
  std::vector<Assignment> out;
  std::vector<char> used(mask.cols(), 0);
  Assignment cur;
  std::size_t best = 0;
  enumerate_matchings(mask, crews, 0, used, cur, out, best);
  return out;
}

class Solver {
 public:
  explicit Solver(const EnvState& root) : root_(root) {
    const PowerNetwork& pn = root.scenario->power;
    const std::size_t nd = root.damaged_states.size();
    served_.assign(std::size_t{1} << nd, 0.0);
    for (std::size_t repaired = 0; repaired < served_.size(); ++repaired) {
      std::vector<bool> dmg(pn.size(), false);
      for (std::size_t k = 0; k < nd; ++k) {
        if (!(repaired >> k & 1)) dmg[static_cast<std::size_t>(root.damaged_states[k].power_index)] = true;
      }
      served_[repaired] = served_kw(pn, energized_mask(pn, dmg));
    }
  }

  ExactResult solve() {
    seed_incumbent();
    Trail trail;
    search(root_, 0.0, trail);
    ExactResult r;
    r.plan = to_plan(best_trail_);
    r.reward = best_;
    r.nodes_expanded = expanded_;
    return r;
  }

 private:
  using Trail = std::vector<std::pair<int, Assignment>>;

  double reward_of(double p) const {
    const EpisodeConfig& c = root_.config();
    return compute_reward(p, root_.p_init, root_.p_max, c.step_hours, c.episode_hours());
  }

  static std::size_t repaired_bits(const EnvState& s) {
    std::size_t bits = 0;
    for (std::size_t k = 0; k < s.damaged_states.size(); ++k) {
      if (!s.damaged_states[k].damaged) bits |= std::size_t{1} << k;
    }
    return bits;
  }

  // Optimistic reward for steps step_index..H-1 of `s`.
  double upper_bound(const EnvState& s) const {
    const EpisodeConfig& cfg = s.config();
    const int remaining = cfg.horizon_steps - s.step_index;
    double total = reward_of(s.p_current);
    if (remaining <= 1) return total;

    const TransportNetwork& roads = s.scenario->roads;
    const std::size_t nd = s.damaged_states.size();
    const int n_dep = s.n_depots();
    std::vector<double> earliest(nd, std::numeric_limits<double>::infinity());
    std::vector<double> repair_left;
    std::vector<double> first_travel(s.crews.size(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < nd; ++k) {
      const DamagedNodeState& d = s.damaged_states[k];
      if (!d.damaged) continue;
      repair_left.push_back(d.repair_time_remaining);
      for (std::size_t c = 0; c < s.crews.size(); ++c) {
        double t = remaining_time_from_position(roads, s.crews[c].position, static_cast<std::size_t>(n_dep) + k, *s.poi);
        earliest[k] = std::min(earliest[k], t + d.repair_time_remaining);
        first_travel[c] = std::min(first_travel[c], t);
      }
    }
    std::sort(repair_left.begin(), repair_left.end());
    const std::size_t now = repaired_bits(s);
    const std::size_t full = (std::size_t{1} << nd) - 1;
    const std::size_t open = full & ~now;

    for (int step = 1; step < remaining; ++step) {
      const double tau = step * cfg.step_hours + 1e-9;
      std::size_t eligible = 0;
      for (std::size_t k = 0; k < nd; ++k) {
        if ((open >> k & 1) && earliest[k] <= tau) eligible |= std::size_t{1} << k;
      }
      // Each crew finishes at most one repair per step and repairs run back to back.
      std::size_t cap = 0;
      for (double travel : first_travel) {
        double t = travel;
        std::size_t n = 0;
        while (n < repair_left.size() && n < static_cast<std::size_t>(step) && t + repair_left[n] <= tau) {
          t += repair_left[n];
          ++n;
        }
        cap += n;
      }
      double p = served_[now];
      if (cap > 0 && eligible != 0) {
        for (std::size_t sub = eligible;; sub = (sub - 1) & eligible) {
          if (static_cast<std::size_t>(std::popcount(sub)) <= cap) p = std::max(p, served_[now | sub]);
          if (sub == 0) break;
        }
      }
      total += reward_of(p);
    }
    return total;
  }

  void search(const EnvState& s, double acc, Trail& trail) {
    ++expanded_;
    if (s.done()) {
      if (acc > best_) {
        best_ = acc;
        best_trail_ = trail;
      }
      return;
    }
    if (acc + upper_bound(s) <= best_ + 1e-12) return;

    std::vector<Assignment> options = candidate_matchings(s);
    if (options.empty()) options.emplace_back();
    for (const Assignment& a : options) {
      EnvState child = s;
      step_with_assignment(child, a);
      if (!a.pairs.empty()) trail.emplace_back(s.step_index, a);
      search(child, child.cumulative_reward(), trail);
      if (!a.pairs.empty()) trail.pop_back();
    }
  }

  // Greedy rollout gives the first incumbent.
  void seed_incumbent() {
    EnvState s = root_;
    Trail trail;
    while (!s.done()) {
      int k = s.step_index;
      StepResult r = step(s, greedy_policy(build_observation(s)));
      if (!r.assigned.pairs.empty()) trail.emplace_back(k, r.assigned);
    }
    best_ = s.cumulative_reward();
    best_trail_ = trail;
  }

  Plan to_plan(const Trail& trail) const {
    Plan p;
    p.crews.resize(root_.crews.size());
    for (const auto& [k, a] : trail) {
      for (auto [c, t] : a.pairs) p.crews[static_cast<std::size_t>(c)].push_back({t, k});
    }
    return p;
  }

  const EnvState& root_;
  std::vector<double> served_;  // by repaired-subset bitmask
  double best_ = -1.0;
  Trail best_trail_;
  std::uint64_t expanded_ = 0;
};

}  // namespace

ExactResult exact_plan(const EnvState& state) {
  if (!state.options.deterministic) throw ContractError("exact_plan: state must be deterministic");
  if (state.step_index != 0) throw ContractError("exact_plan: state must be fresh from reset");
  if (state.n_crews() > kExactMaxCrews || static_cast<int>(state.damaged_states.size()) > kExactMaxDamaged) {
    throw ConfigError("exact_plan: instance too large (" + std::to_string(state.n_crews()) + " crews, " +
                      std::to_string(state.damaged_states.size()) + " damaged; limits " +
                      std::to_string(kExactMaxCrews) + " and " + std::to_string(kExactMaxDamaged) + ")");
  }
  return Solver(state).solve();
}

double simulate_plan(const Plan& plan, const EnvState& state) {
  if (!state.options.deterministic) throw ContractError("simulate_plan: state must be deterministic");
  if (plan.crews.size() != state.crews.size()) throw ContractError("simulate_plan: plan crew count mismatch");
  EnvState s = state;
  std::vector<std::size_t> next(plan.crews.size(), 0);
  while (!s.done()) {
    Assignment a;
    for (std::size_t c = 0; c < plan.crews.size(); ++c) {
      const auto& seq = plan.crews[c];
      if (next[c] < seq.size() && seq[next[c]].step == s.step_index) {
        a.pairs.emplace_back(static_cast<int>(c), seq[next[c]].target);
        ++next[c];
      } else if (next[c] < seq.size() && seq[next[c]].step < s.step_index) {
        throw ContractError("simulate_plan: plan entries out of step order");
      }
    }
    step_with_assignment(s, a);
  }
  for (std::size_t c = 0; c < plan.crews.size(); ++c) {
    if (next[c] != plan.crews[c].size()) throw ContractError("simulate_plan: entries beyond the horizon");
  }
  return s.cumulative_reward();
}

std::string plan_to_json(const Plan& plan, const EnvState& state) {
  nlohmann::json j;
  j["crews"] = nlohmann::json::array();
  for (std::size_t c = 0; c < plan.crews.size(); ++c) {
    nlohmann::json seq = nlohmann::json::array();
    for (const PlanEntry& e : plan.crews[c]) {
      bool depot = state.is_depot(e.target);
      int id = depot ? state.scenario->depots[static_cast<std::size_t>(e.target)]
                     : state.damaged_states[static_cast<std::size_t>(e.target - state.n_depots())].power_id;
      seq.push_back({{"kind", depot ? "depot" : "damaged"}, {"id", id}, {"column", e.target}, {"step", e.step}});
    }
    j["crews"].push_back({{"crew", c}, {"targets", std::move(seq)}});
  }
  return j.dump(1) + "\n";
}

}  // namespace restore
