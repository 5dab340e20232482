#pragma once

#include <span>
#include <vector>

#include "restore/net_core.hpp"

namespace restore {

struct ServedResult {
  double served_kw = 0.0;
  std::vector<int> energized;  // power node ids, ascending index order
};

// Index-level kernel: a node is energized iff it is reachable from an
// undamaged source through undamaged nodes. `damaged` is indexed by node.
std::vector<bool> energized_mask(const PowerNetwork& power, const std::vector<bool>& damaged);

// Sum of loads over energized nodes, in index order.
double served_kw(const PowerNetwork& power, const std::vector<bool>& energized);

ServedResult compute_served(const PowerNetwork& power, std::span<const int> damaged_ids);

// p_max minus what is served when `node_id` is the only damaged node.
double power_lost_if_only(const PowerNetwork& power, int node_id);

// True iff some neighbor of `node_id` is energized under `damaged_ids`.
bool adjacent_to_energized(const PowerNetwork& power, std::span<const int> damaged_ids, int node_id);

}  // namespace restore
