#include "restore/matching.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "restore/environment.hpp"
#include "restore/error.hpp"

namespace restore {

PermissionMask preprocess_mask(const EnvState& state) {
  const int nc = state.n_crews();
  const int nt = state.n_targets();
  const int nd = state.n_depots();
  const int cap = state.config().crew_capacity;
  PermissionMask mask(static_cast<std::size_t>(nc), static_cast<std::size_t>(nt), 0);
  for (int c = 0; c < nc; ++c) {
    const CrewState& crew = state.crews[static_cast<std::size_t>(c)];
    if (crew.assigned()) continue;
    for (int t = 0; t < nt; ++t) {
      bool ok;
      if (t < nd) {
        ok = crew.cargo < cap;
      } else {
        const DamagedNodeState& d = state.damaged_states[static_cast<std::size_t>(t - nd)];
        ok = d.damaged && d.assigned_crew < 0 && crew.cargo > 0;
      }
      mask(static_cast<std::size_t>(c), static_cast<std::size_t>(t)) = ok ? 1 : 0;
    }
  }
  return mask;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rectangular Hungarian (rows <= cols), minimizing cost. Returns the column of
// each row and leaves optimal duals in u, v (v <= 0, v == 0 on free columns).
std::vector<int> hungarian(const Matrix<double>& cost, std::vector<double>& u, std::vector<double>& v) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  u.assign(n + 1, 0.0);
  v.assign(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = kInf;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j]) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  // Drop the 1-based sentinel slots so u[i], v[j] line up with rows/cols.
  u.erase(u.begin());
  v.erase(v.begin());
  return row_to_col;
}

}  // namespace

Assignment max_weight_matching(const IncentiveMatrix& weights, const PermissionMask& mask) {
  if (weights.rows() != mask.rows() || weights.cols() != mask.cols()) {
    throw ContractError("max_weight_matching: weight and mask shapes differ");
  }
  std::vector<int> crews, targets;
  double wmin = kInf, wmax = -kInf;
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    bool any = false;
    for (std::size_t c = 0; c < weights.cols(); ++c) {
      if (!mask(r, c)) continue;
      double w = weights(r, c);
      if (!std::isfinite(w)) throw ContractError("max_weight_matching: non-finite permitted weight");
      wmin = std::min(wmin, w);
      wmax = std::max(wmax, w);
      any = true;
    }
    if (any) crews.push_back(static_cast<int>(r));
  }
  for (std::size_t c = 0; c < weights.cols(); ++c) {
    for (std::size_t r = 0; r < weights.rows(); ++r) {
      if (mask(r, c)) {
        targets.push_back(static_cast<int>(c));
        break;
      }
    }
  }
  Assignment out;
  if (crews.empty()) return out;

  const std::size_t n = crews.size();
  const std::size_t real_cols = targets.size();
  const std::size_t m = std::max(n, real_cols);
  const double spread = wmax - wmin;
  // One more permitted pair always outweighs any weight difference.
  const double big = (spread + 1.0) * static_cast<double>(n + 1);
  const double tol = 1e-10 * (big + spread);

  Matrix<double> cost(n, m, 0.0);
  Matrix<char> ok(n, m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < real_cols; ++j) {
      auto r = static_cast<std::size_t>(crews[i]);
      auto c = static_cast<std::size_t>(targets[j]);
      if (mask(r, c)) {
        ok(i, j) = 1;
        cost(i, j) = -((weights(r, c) - wmin) + big);
      }
    }
  }

  std::vector<double> u, v;
  std::vector<int> col_of = hungarian(cost, u, v);

  // Every optimum is a perfect matching on tight edges of the square problem
  // obtained by adding zero-cost dummy rows (dual 0) for the free columns.
  // Fix rows in crew order, moving each to its best reachable tight column
  // along an alternating cycle through later rows.
  std::vector<int> row_of(m, -1);  // -1: free (held by a dummy row)
  for (std::size_t i = 0; i < n; ++i) row_of[static_cast<std::size_t>(col_of[i])] = static_cast<int>(i);
  auto tight = [&](std::size_t i, std::size_t j) { return cost(i, j) - u[i] - v[j] <= tol; };
  auto dummy_tight = [&](std::size_t j) { return std::abs(v[j]) <= tol; };
  auto rank = [&](std::size_t i, std::size_t j) { return ok(i, j) ? j : m + j; };

  std::vector<int> parent(m);
  std::vector<char> good(m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c0 = static_cast<std::size_t>(col_of[i]);
    std::fill(good.begin(), good.end(), 0);
    std::fill(parent.begin(), parent.end(), -1);
    good[c0] = 1;
    std::deque<std::size_t> queue{c0};
    while (!queue.empty()) {
      std::size_t g = queue.front();
      queue.pop_front();
      for (std::size_t r = i + 1; r < n; ++r) {
        auto h = static_cast<std::size_t>(col_of[r]);
        if (!good[h] && tight(r, g)) {
          good[h] = 1;
          parent[h] = static_cast<int>(g);
          queue.push_back(h);
        }
      }
      if (dummy_tight(g)) {
        for (std::size_t h = 0; h < m; ++h) {
          if (row_of[h] < 0 && !good[h]) {
            good[h] = 1;
            parent[h] = static_cast<int>(g);
            queue.push_back(h);
          }
        }
      }
    }
    std::size_t best = c0;
    for (std::size_t j = 0; j < m; ++j) {
      if (good[j] && tight(i, j) && rank(i, j) < rank(i, best)) best = j;
    }
    if (best == c0) continue;
    // Collect moves first: owner of h shifts to parent[h].
    std::vector<std::pair<int, std::size_t>> moves;
    for (std::size_t h = best; h != c0; h = static_cast<std::size_t>(parent[h])) {
      moves.emplace_back(row_of[h], static_cast<std::size_t>(parent[h]));
    }
    col_of[i] = static_cast<int>(best);
    for (auto [r, g] : moves) {
      if (r >= 0) col_of[static_cast<std::size_t>(r)] = static_cast<int>(g);
    }
    std::fill(row_of.begin(), row_of.end(), -1);
    for (std::size_t k = 0; k < n; ++k) row_of[static_cast<std::size_t>(col_of[k])] = static_cast<int>(k);
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto j = static_cast<std::size_t>(col_of[i]);
    if (j < real_cols && ok(i, j)) out.pairs.emplace_back(crews[i], targets[j]);
  }
  return out;
}

double assignment_weight(const IncentiveMatrix& weights, const Assignment& a) {
  double total = 0.0;
  for (auto [c, t] : a.pairs) total += weights(static_cast<std::size_t>(c), static_cast<std::size_t>(t));
  return total;
}

}  // namespace restore
