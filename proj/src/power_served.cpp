#include "restore/power_served.hpp"

#include "restore/error.hpp"

namespace restore {

namespace {

std::vector<bool> damaged_mask(const PowerNetwork& power, std::span<const int> ids) {
  std::vector<bool> mask(power.size(), false);
  for (int id : ids) mask[static_cast<std::size_t>(power.require_index(id))] = true;
  return mask;
}

}  // namespace

std::vector<bool> energized_mask(const PowerNetwork& power, const std::vector<bool>& damaged) {
  std::vector<bool> on(power.size(), false);
  std::vector<int> stack;
  for (std::size_t i = 0; i < power.size(); ++i) {
    if (power.nodes()[i].is_source && !damaged[i]) {
      on[i] = true;
      stack.push_back(static_cast<int>(i));
    }
  }
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : power.neighbors(u)) {
      auto wi = static_cast<std::size_t>(w);
      if (!on[wi] && !damaged[wi]) {
        on[wi] = true;
        stack.push_back(w);
      }
    }
  }
  return on;
}

double served_kw(const PowerNetwork& power, const std::vector<bool>& energized) {
  double total = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    if (energized[i]) total += power.nodes()[i].load_kw;
  }
  return total;
}

ServedResult compute_served(const PowerNetwork& power, std::span<const int> damaged_ids) {
  auto on = energized_mask(power, damaged_mask(power, damaged_ids));
  ServedResult r;
  r.served_kw = served_kw(power, on);
  for (std::size_t i = 0; i < power.size(); ++i) {
    if (on[i]) r.energized.push_back(power.nodes()[i].id);
  }
  return r;
}

double power_lost_if_only(const PowerNetwork& power, int node_id) {
  int one[] = {node_id};
  return power.p_max() - compute_served(power, one).served_kw;
}

bool adjacent_to_energized(const PowerNetwork& power, std::span<const int> damaged_ids, int node_id) {
  auto dmg = damaged_mask(power, damaged_ids);
  int idx = power.require_index(node_id);
  if (!dmg[static_cast<std::size_t>(idx)]) {
    throw ContractError("adjacent_to_energized: node " + std::to_string(node_id) + " is not damaged");
  }
  auto on = energized_mask(power, dmg);
  for (int w : power.neighbors(idx)) {
    if (on[static_cast<std::size_t>(w)]) return true;
  }
  return false;
}

}  // namespace restore
