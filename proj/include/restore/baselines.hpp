#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "restore/environment.hpp"

namespace restore {

// i.i.d. standard normal incentives.
IncentiveMatrix random_policy(const ObservationGraph& obs, Rng& rng);

inline constexpr double kGreedyEpsilon = 1e-6;

// Power restored per hour of travel and repair for damaged targets; depot
// columns rank by nearness but always below every damaged column.
IncentiveMatrix greedy_policy(const ObservationGraph& obs);

struct PlanEntry {
  int target = 0;  // column: depots, then damaged nodes
  int step = 0;    // step at whose start the crew takes the target
  bool operator==(const PlanEntry&) const = default;
};

// Per-crew ordered target sequences. A damaged node may reappear after a
// partial drop-off released the crew.
struct Plan {
  std::vector<std::vector<PlanEntry>> crews;
  bool operator==(const Plan&) const = default;
};

inline constexpr int kExactMaxDamaged = 6;
inline constexpr int kExactMaxCrews = 2;

struct ExactResult {
  Plan plan;
  double reward = 0.0;
  std::uint64_t nodes_expanded = 0;
};

// Branch and bound over every maximum-cardinality matching the environment
// could make at each step, so no matching-driven policy can beat it on the
// same determinized instance. `state` must be fresh from reset with
// deterministic options. Throws ConfigError above the size limits.
ExactResult exact_plan(const EnvState& state);

// Replays a plan with no matching. Throws ContractError if an entry is not
// permitted when its step comes (e.g. a crew with no cargo sent to a node).
double simulate_plan(const Plan& plan, const EnvState& state);

// Plan as JSON: per-crew lists of {kind, id, column, step}.
std::string plan_to_json(const Plan& plan, const EnvState& state);

}  // namespace restore
