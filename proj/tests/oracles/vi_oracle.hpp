#pragma once

// Independent reference solutions for the planners: finite-horizon value
// iteration over (cell, elapsed steps) for the Q-learning reward, and a plain
// array Dijkstra for the costmap step costs.

#include <limits>
#include <optional>
#include <vector>

#include "qplan/gridworld.hpp"
#include "qplan/qplanner.hpp"

namespace oracle {

using qplan::Action;
using qplan::Cell;
using qplan::CostMap;

// Length (cells, start and goal included) of the return-maximizing path under the
// step-indexed reward: max_reward / t on reaching the goal at step t, -1 on a
// collision, -risk_step_penalty for entering a risk cell, discount gamma.
// nullopt when the goal cannot be reached within the horizon.
inline std::optional<int> optimal_q_path_cells(const CostMap& cost, Cell start, Cell goal, const qplan::QConfig& cfg,
                                               int horizon = 0) {
  if (start == goal) return 1;
  const int w = cost.width(), h = cost.height();
  if (horizon <= 0) horizon = 2 * w * h + 2;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> next(n, 0.0), cur(n, 0.0);
  // value[t] is only needed from t+1, so roll backwards but remember the argmax
  // successor per (t, cell) for the forward rollout.
  std::vector<std::vector<int>> choice(horizon, std::vector<int>(n, -1));
  auto id = [w](Cell c) { return static_cast<std::size_t>(c.y) * w + c.x; };
  auto qv = [&](Cell c, Action a, int t, const std::vector<double>& v) {
    const Cell nx = qplan::apply(c, a);
    if (cost.blocked(nx)) return -1.0;
    if (nx == goal) return cfg.max_reward / (t + 1);
    const double r = cost.risk(nx) ? -cfg.risk_step_penalty : 0.0;
    return r + (t + 1 < horizon ? cfg.gamma * v[id(nx)] : 0.0);
  };
  for (int t = horizon - 1; t >= 0; --t) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Cell c{x, y};
        if (cost.blocked(c) || c == goal) continue;
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int k = 0; k < qplan::kActionCount; ++k) {
          const double v = qv(c, qplan::kActions[k], t, next);
          if (v > best + 1e-12) best = v, arg = k;
        }
        cur[id(c)] = best;
        choice[t][id(c)] = arg;
      }
    std::swap(cur, next);
  }
  Cell c = start;
  for (int t = 0; t < horizon; ++t) {
    c = qplan::apply(c, qplan::kActions[choice[t][id(c)]]);
    if (cost.blocked(c)) return std::nullopt;
    if (c == goal) return t + 2;
  }
  return std::nullopt;
}

// O(V^2) Dijkstra with 4-connected moves; entering a cell costs cost.step_cost.
inline std::optional<double> dijkstra_cost(const CostMap& cost, Cell start, Cell goal) {
  const int w = cost.width(), h = cost.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<char> done(n, 0);
  dist[static_cast<std::size_t>(start.y) * w + start.x] = 0.0;
  for (;;) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && dist[i] < inf && (u == n || dist[i] < dist[u])) u = i;
    if (u == n) return std::nullopt;
    const Cell c{static_cast<int>(u % w), static_cast<int>(u / w)};
    if (c == goal) return dist[u];
    done[u] = 1;
    for (Action a : qplan::kActions) {
      const Cell nx = qplan::apply(c, a);
      if (cost.blocked(nx)) continue;
      const std::size_t v = static_cast<std::size_t>(nx.y) * w + nx.x;
      const double d = dist[u] + cost.step_cost(nx);
      if (d < dist[v]) dist[v] = d;
    }
  }
}

}  // namespace oracle
