#pragma once

#include <utility>
#include <vector>

#include "restore/matrix.hpp"

namespace restore {

// Conflict-free (crew, target) pairs, sorted by crew.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;

  bool operator==(const Assignment&) const = default;
};

// Maximum-cardinality matching over permitted pairs that, among those, maximizes
// the summed weight. Remaining ties go to the lexicographically smallest
// (crew, target) sequence. O(rows^2 * cols).
Assignment max_weight_matching(const IncentiveMatrix& weights, const PermissionMask& mask);

double assignment_weight(const IncentiveMatrix& weights, const Assignment& a);

}  // namespace restore
