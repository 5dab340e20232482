#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "restore/matching.hpp"
#include "restore/matrix.hpp"
#include "restore/net_core.hpp"
#include "restore/rng.hpp"
#include "restore/routing.hpp"

namespace restore {

// Repair-time distribution: lognormal, clamped into [1, 8] hours.
inline constexpr double kRepairLogMean = -0.3072;
inline constexpr double kRepairLogSigma = 1.8404;
inline constexpr double kRepairMinHours = 1.0;
inline constexpr double kRepairMaxHours = 8.0;
// Per-step crew work time: N(1, 0.1) x step length.
inline constexpr double kBudgetMean = 1.0;
inline constexpr double kBudgetSigma = 0.1;

struct DamagedNodeState {
  int power_index = 0;
  int power_id = 0;
  int road_index = 0;
  bool damaged = true;                  // i0
  int resources_required = 0;           // i1, still missing on site
  double repair_time_remaining = 0.0;   // i2
  double power_lost_solo = 0.0;         // i3
  bool adjacent_energized = false;      // i4
  int resources_on_site = 0;
  int resources_initial = 0;
  double repair_time_initial = 0.0;
  int assigned_crew = -1;
};

struct CrewState {
  int id = 0;
  CrewPosition position;
  int cargo = 0;   // c0
  int target = -1;  // target column, -1 when free
  std::vector<int> route;  // road indices toward the target
  std::size_t route_pos = 0;  // position.node == route[route_pos]

  bool assigned() const { return target >= 0; }
};

struct EnvOptions {
  // Budgets fixed at step_hours instead of sampled.
  bool deterministic = false;
};

struct EnvState {
  std::shared_ptr<const Scenario> scenario;
  // Columns of the action space: depots then damaged nodes.
  std::shared_ptr<const PoiMatrix> poi;
  EnvOptions options;

  int step_index = 0;
  std::vector<CrewState> crews;
  std::vector<DamagedNodeState> damaged_states;
  std::vector<bool> damaged_mask;  // by power index, current
  double p_init = 0.0;
  double p_max = 0.0;
  double p_current = 0.0;
  int resources_dispensed = 0;  // handed out at depots
  std::uint64_t episode_seed = 0;
  Rng budget_rng;
  // Running episode reward, Neumaier-compensated.
  double reward_sum = 0.0;
  double reward_carry = 0.0;

  const EpisodeConfig& config() const { return scenario->config; }
  int n_crews() const { return static_cast<int>(crews.size()); }
  int n_depots() const { return static_cast<int>(scenario->depots.size()); }
  int n_targets() const { return n_depots() + static_cast<int>(damaged_states.size()); }
  bool is_depot(int target) const { return target < n_depots(); }
  bool done() const { return step_index >= config().horizon_steps; }
  int n_repaired() const;
  double cumulative_reward() const { return reward_sum + reward_carry; }
};

enum class NodeKind : std::uint8_t { relation = 0, crew = 1, depot = 2, damaged = 3 };

struct ObsNode {
  NodeKind kind = NodeKind::relation;
  // Crew index for crews, target column for depots/damaged, -1 for relations.
  int entity = -1;
  // Raw values: relation b0 | crew c0 | depot d0 | damaged i0..i4.
  std::array<double, 5> features{};
};

// Crew/target bigraph with a relation node on every crew-target edge.
struct ObservationGraph {
  int n_crews = 0;
  int n_depots = 0;
  int n_targets = 0;
  std::vector<ObsNode> nodes;
  std::vector<std::pair<int, int>> edges;  // undirected
  // Normalization constants for policy input.
  double episode_hours = 1.0;
  double p_max = 1.0;
  int crew_capacity = 1;

  std::size_t n_relations() const;
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  Assignment assigned;  // new pairs made this step
};

double clamp_repair_time(double raw_hours);
double sample_repair_time(Rng& rng);
double budget_from_draw(double z, double step_hours);
double crew_time_budget(Rng& rng, double step_hours);

double compute_reward(double p, double p_init, double p_max, double step_hours, double episode_hours);

// Samples damage, repair times and requirements; crews start at depots
// round-robin with full cargo. Throws ConfigError if n_damaged exceeds the
// non-source node count.
EnvState reset(std::shared_ptr<const Scenario> scenario, std::uint64_t episode_seed, EnvOptions options = {});

// Columns of `mask` a crew may be matched to this step.
PermissionMask preprocess_mask(const EnvState& state);

// True iff some crew has a permitted target this step.
bool needs_decision(const EnvState& state);
// One step: reward from p at step start, matching of free crews, movement and
// repair. Throws ContractError on a wrong shape or a finished episode.
StepResult step(EnvState& state, const IncentiveMatrix& incentives);

// Same dynamics with the matching replaced by the given pairs. Each pair must
// be permitted by preprocess_mask; ContractError otherwise.
StepResult step_with_assignment(EnvState& state, const Assignment& assignment);

ObservationGraph build_observation(const EnvState& state);

using Policy = std::function<IncentiveMatrix(const ObservationGraph&)>;

struct TraceRow {
  int step = 0;
  double p_current_kw = 0.0;  // at the start of the step
  double reward = 0.0;
  double cumulative_reward = 0.0;
  int n_repaired = 0;  // at the start of the step
};

// Runs to the horizon; returns the cumulative reward. The policy is consulted
// only on steps where needs_decision holds.
double run_episode(EnvState& state, const Policy& policy, std::vector<TraceRow>* trace = nullptr);

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);

}  // namespace restore
