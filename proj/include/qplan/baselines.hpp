#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qplan/gridworld.hpp"
#include "qplan/types.hpp"

namespace qplan {

enum class PlanFailure {
  NoPath,                   // A*: search exhausted
  MaxIterations,            // RRT: iteration budget spent
  NoCollisionFreeSolution,  // PSO: best particle still collides
  UnreachableGoal,          // Q-learning: goal never reached during training
  NoPolicyPath,             // Q-learning: greedy rollout fails
  BadInput,                 // start or goal blocked
};

inline const char* to_string(PlanFailure f) {
  switch (f) {
    case PlanFailure::NoPath: return "NoPath";
    case PlanFailure::MaxIterations: return "MaxIterations";
    case PlanFailure::NoCollisionFreeSolution: return "NoCollisionFreeSolution";
    case PlanFailure::UnreachableGoal: return "UnreachableGoal";
    case PlanFailure::NoPolicyPath: return "NoPolicyPath";
    case PlanFailure::BadInput: return "BadInput";
  }
  return "?";
}

struct PlanResult {
  // Grid planners fill `cells` and mirror them as cell centers in `waypoints`;
  // continuous planners fill `waypoints` only.
  std::vector<Point> waypoints;
  DiscretePath cells;
  std::optional<PlanFailure> failure;
  double planning_time = 0.0;  // s, wall clock
  long long expanded_or_iterations = 0;
  std::size_t mem_proxy_bytes = 0;

  bool success() const noexcept { return !failure.has_value(); }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline std::vector<Point> centers(const DiscretePath& cells) {
  std::vector<Point> out;
  out.reserve(cells.size());
  for (Cell c : cells) out.push_back(center(c));
  return out;
}

}  // namespace detail

// --- A* ----------------------------------------------------------------------------

struct AStarConfig {
  double robot_radius = 0.4;  // consumed when the cost map is built
};

// 4-connected A* with Euclidean heuristic. Step cost is the entered cell's cost.
inline PlanResult astar(const CostMap& cost, Cell start, Cell goal, const AStarConfig& = {}) {
  detail::Stopwatch clock;
  PlanResult res;
  if (cost.blocked(start) || cost.blocked(goal)) {
    res.failure = PlanFailure::BadInput;
    return res;
  }
  const int w = cost.width();
  const std::size_t n = static_cast<std::size_t>(w) * cost.height();
  auto id = [w](Cell c) { return static_cast<std::size_t>(c.y) * w + c.x; };
  auto cell = [w](std::size_t i) { return Cell{static_cast<int>(i % w), static_cast<int>(i / w)}; };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, kInf);
  std::vector<std::size_t> parent(n, n);
  std::vector<std::uint8_t> closed(n, 0);
  using Entry = std::tuple<double, double, std::size_t>;  // f, h, cell index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const auto h = [&](Cell c) { return euclidean(c, goal); };
  g[id(start)] = 0.0;
  open.emplace(h(start), h(start), id(start));
  std::size_t closed_count = 0, peak = 1;
  bool found = false;
  while (!open.empty()) {
    const auto [f, hc, i] = open.top();
    open.pop();
    if (closed[i]) continue;
    closed[i] = 1;
    ++closed_count;
    ++res.expanded_or_iterations;
    const Cell c = cell(i);
    if (c == goal) {
      found = true;
      break;
    }
    for (Cell nb : {Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}, Cell{c.x - 1, c.y}, Cell{c.x + 1, c.y}}) {
      if (cost.blocked(nb)) continue;
      const std::size_t j = id(nb);
      if (closed[j]) continue;
      const double cand = g[i] + cost.step_cost(nb);
      if (cand < g[j]) {
        g[j] = cand;
        parent[j] = i;
        const double hn = h(nb);
        open.emplace(cand + hn, hn, j);
      }
    }
    peak = std::max(peak, open.size() + closed_count);
  }
  res.mem_proxy_bytes = peak * sizeof(Entry);
  if (!found) {
    res.failure = PlanFailure::NoPath;
    res.planning_time = clock.seconds();
    return res;
  }
  for (std::size_t i = id(goal); i != n; i = parent[i]) res.cells.push_back(cell(i));
  std::reverse(res.cells.begin(), res.cells.end());
  res.waypoints = detail::centers(res.cells);
  res.planning_time = clock.seconds();
  return res;
}

// Sum of entered-cell costs along a 4-connected path.
inline double path_cost(const CostMap& cost, const DiscretePath& path) {
  double c = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) c += cost.step_cost(path[i]);
  return c;
}

// --- RRT ---------------------------------------------------------------------------

struct RRTConfig {
  double robot_radius = 0.4;
  double goal_sample_rate = 0.05;
  double expansion_distance = 5.0;  // m
  int max_iterations = 5000;
  // Segment checks use exact supercover traversal, which covers any sampling step.
  double collision_check_step = 0.1;

  void validate() const {
    if (!(goal_sample_rate >= 0.0 && goal_sample_rate <= 1.0)) throw std::invalid_argument("goal_sample_rate outside [0,1]");
    if (!(expansion_distance > 0.0)) throw std::invalid_argument("expansion_distance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  }
};

inline PlanResult rrt(const CostMap& cost, Cell start, Cell goal, const RRTConfig& cfg, Rng& rng) {
  cfg.validate();
  detail::Stopwatch clock;
  PlanResult res;
  if (cost.blocked(start) || cost.blocked(goal)) {
    res.failure = PlanFailure::BadInput;
    return res;
  }
  const Point goal_p = center(goal);
  std::vector<Point> nodes{center(start)};
  std::vector<int> parent{-1};

  auto finish = [&](int last) {
    std::vector<Point> rev;
    for (int i = last; i >= 0; i = parent[static_cast<std::size_t>(i)]) rev.push_back(nodes[static_cast<std::size_t>(i)]);
    res.waypoints.assign(rev.rbegin(), rev.rend());
  };
  auto try_goal = [&](int from) {
    const Point p = nodes[static_cast<std::size_t>(from)];
    if (euclidean(p, goal_p) > cfg.expansion_distance || !line_of_sight(cost, p, goal_p)) return false;
    if (p == goal_p) {
      finish(from);
    } else {
      nodes.push_back(goal_p);
      parent.push_back(from);
      finish(static_cast<int>(nodes.size()) - 1);
    }
    return true;
  };

  bool done = try_goal(0);
  const double xmax = cost.width() - 0.5, ymax = cost.height() - 0.5;
  while (!done && res.expanded_or_iterations < cfg.max_iterations) {
    ++res.expanded_or_iterations;
    Point sample = goal_p;
    if (rng.uniform() >= cfg.goal_sample_rate) {
      do {
        sample = {rng.uniform(-0.5, xmax), rng.uniform(-0.5, ymax)};
      } while (cost.blocked(cell_of(sample)));
    }
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = euclidean(nodes[i], sample);
      if (d < best) best = d, nearest = i;
    }
    if (best == 0.0) continue;
    const Point from = nodes[nearest];
    const double step = std::min(cfg.expansion_distance, best);
    const Point to{from.x + (sample.x - from.x) * step / best, from.y + (sample.y - from.y) * step / best};
    if (!line_of_sight(cost, from, to)) continue;
    nodes.push_back(to);
    parent.push_back(static_cast<int>(nearest));
    done = try_goal(static_cast<int>(nodes.size()) - 1);
  }
  res.mem_proxy_bytes = nodes.size() * (sizeof(Point) + sizeof(int));
  if (!done) res.failure = PlanFailure::MaxIterations;
  res.planning_time = clock.seconds();
  return res;
}

// --- PSO ---------------------------------------------------------------------------

struct PSOConfig {
  double c1 = 1.5;
  double c2 = 1.5;
  double inertia = 1.0;
  double damping = 0.98;
  int population = 50;
  int iterations = 100;
  int waypoints = 5;
  double collision_penalty = 1e4;
  double velocity_limit = 0.2;  // fraction of the map extent per iteration

  void validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must be in (0, 1]");
    if (population < 2) throw std::invalid_argument("population must be at least 2");
    if (waypoints < 0) throw std::invalid_argument("waypoint count must be nonnegative");
    if (iterations < 0) throw std::invalid_argument("iterations must be nonnegative");
  }
};

struct PolylineAudit {
  int colliding_segments = 0;
  int risk_cells = 0;
};

inline PolylineAudit audit_polyline(const CostMap& cost, const std::vector<Point>& pts) {
  PolylineAudit a;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    bool hit = false;
    for (Cell c : supercover(pts[i - 1], pts[i])) {
      if (cost.blocked(c)) hit = true;
      else if (cost.risk(c)) ++a.risk_cells;
    }
    a.colliding_segments += hit ? 1 : 0;
  }
  return a;
}

struct PSORun {
  PlanResult plan;
  double final_inertia = 0.0;
  double best_fitness = 0.0;
};

inline PSORun pso_run(const CostMap& cost, Cell start, Cell goal, const PSOConfig& cfg, Rng& rng) {
  cfg.validate();
  detail::Stopwatch clock;
  PSORun run;
  PlanResult& res = run.plan;
  if (cost.blocked(start) || cost.blocked(goal)) {
    res.failure = PlanFailure::BadInput;
    return run;
  }
  const Point s = center(start), g = center(goal);
  const int k = cfg.waypoints, dims = 2 * k;
  const double lo_x = -0.5, hi_x = cost.width() - 0.5, lo_y = -0.5, hi_y = cost.height() - 0.5;
  const double vmax_x = cfg.velocity_limit * (hi_x - lo_x), vmax_y = cfg.velocity_limit * (hi_y - lo_y);

  auto polyline = [&](const std::vector<double>& x) {
    std::vector<Point> pts{s};
    for (int i = 0; i < k; ++i) pts.push_back({x[2 * i], x[2 * i + 1]});
    pts.push_back(g);
    return pts;
  };
  auto fitness = [&](const std::vector<double>& x) {
    const auto pts = polyline(x);
    const PolylineAudit a = audit_polyline(cost, pts);
    return polyline_length(pts) + cfg.collision_penalty * a.colliding_segments + cost.risk_penalty() * a.risk_cells;
  };
  auto clamp_pos = [&](std::vector<double>& x) {
    for (int i = 0; i < k; ++i) {
      x[2 * i] = std::clamp(x[2 * i], lo_x, std::nextafter(hi_x, lo_x));
      x[2 * i + 1] = std::clamp(x[2 * i + 1], lo_y, std::nextafter(hi_y, lo_y));
    }
  };

  // Particle 0 is the straight start-goal line; the rest scatter around it.
  const int pop = cfg.population;
  std::vector<std::vector<double>> pos(pop, std::vector<double>(dims)), vel(pop, std::vector<double>(dims, 0.0));
  std::vector<std::vector<double>> pbest(pop);
  std::vector<double> pbest_fit(pop);
  const double spread_x = (hi_x - lo_x) / 3.0, spread_y = (hi_y - lo_y) / 3.0;
  for (int p = 0; p < pop; ++p) {
    for (int i = 0; i < k; ++i) {
      const double t = static_cast<double>(i + 1) / (k + 1);
      pos[p][2 * i] = s.x + t * (g.x - s.x) + (p == 0 ? 0.0 : rng.uniform(-spread_x, spread_x));
      pos[p][2 * i + 1] = s.y + t * (g.y - s.y) + (p == 0 ? 0.0 : rng.uniform(-spread_y, spread_y));
    }
    clamp_pos(pos[p]);
    for (int d = 0; d < dims; ++d) vel[p][d] = p == 0 ? 0.0 : rng.uniform(-1.0, 1.0) * (d % 2 ? vmax_y : vmax_x) * 0.1;
    pbest[p] = pos[p];
    pbest_fit[p] = fitness(pos[p]);
  }
  int gbest = static_cast<int>(std::min_element(pbest_fit.begin(), pbest_fit.end()) - pbest_fit.begin());
  std::vector<double> gbest_pos = pbest[gbest];
  double gbest_fit = pbest_fit[gbest];

  double w = cfg.inertia;
  for (int it = 0; it < cfg.iterations; ++it) {
    ++res.expanded_or_iterations;
    for (int p = 0; p < pop; ++p) {
      for (int d = 0; d < dims; ++d) {
        const double r1 = rng.uniform(), r2 = rng.uniform();
        double v = w * vel[p][d] + cfg.c1 * r1 * (pbest[p][d] - pos[p][d]) + cfg.c2 * r2 * (gbest_pos[d] - pos[p][d]);
        const double vmax = d % 2 ? vmax_y : vmax_x;
        vel[p][d] = std::clamp(v, -vmax, vmax);
        pos[p][d] += vel[p][d];
      }
      clamp_pos(pos[p]);
      const double f = fitness(pos[p]);
      if (f < pbest_fit[p]) {
        pbest_fit[p] = f;
        pbest[p] = pos[p];
        if (f < gbest_fit) gbest_fit = f, gbest_pos = pos[p];
      }
    }
    w *= cfg.damping;
  }
  run.final_inertia = w;
  run.best_fitness = gbest_fit;
  res.mem_proxy_bytes = static_cast<std::size_t>(pop) * 3 * dims * sizeof(double);

  auto pts = polyline(gbest_pos);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (audit_polyline(cost, pts).colliding_segments > 0) res.failure = PlanFailure::NoCollisionFreeSolution;
  else res.waypoints = std::move(pts);
  res.planning_time = clock.seconds();
  return run;
}

inline PlanResult pso(const CostMap& cost, Cell start, Cell goal, const PSOConfig& cfg, Rng& rng) {
  return pso_run(cost, start, goal, cfg, rng).plan;
}

// --- Polyline to grid --------------------------------------------------------------

// 4-connected cell walk along a polyline. Where a segment crosses a cell corner the
// walk detours through whichever side cell is free. Returns nullopt if any visited
// cell is blocked.
inline std::optional<DiscretePath> rasterize(const CostMap& cost, const std::vector<Point>& pts) {
  if (pts.empty()) return std::nullopt;
  DiscretePath out{cell_of(pts.front())};
  if (cost.blocked(out.back())) return std::nullopt;
  auto push = [&](Cell c) {
    if (cost.blocked(c)) return false;
    if (c != out.back()) out.push_back(c);
    return true;
  };
  for (std::size_t i = 1; i < pts.size(); ++i) {
    Cell prev = cell_of(pts[i - 1]);
    for (Cell c : supercover(pts[i - 1], pts[i])) {
      if (c == prev) continue;
      const int mx = std::abs(c.x - prev.x), my = std::abs(c.y - prev.y);
      if (mx + my == 1) {
        if (!push(c)) return std::nullopt;
        prev = c;
      } else if (mx == 1 && my == 1) {
        const Cell a{c.x, prev.y}, b{prev.x, c.y};
        if (!cost.blocked(a)) push(a);
        else if (!cost.blocked(b)) push(b);
        else return std::nullopt;
        if (!push(c)) return std::nullopt;
        prev = c;
      } else if (c != prev) {
        // Side cells emitted by a near-corner crossing; they are checked but not walked.
        if (cost.blocked(c)) return std::nullopt;
      }
    }
  }
  // Drop immediate back-and-forth steps.
  DiscretePath clean;
  for (Cell c : out) {
    if (clean.size() >= 2 && clean[clean.size() - 2] == c) clean.pop_back();
    else clean.push_back(c);
  }
  return clean;
}

}  // namespace qplan
