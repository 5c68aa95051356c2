#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qplan/gridworld.hpp"
#include "qplan/types.hpp"

namespace qplan {

// Fixed order doubles as the greedy tie-break order.
enum class Action : std::uint8_t { Forward = 0, Backward = 1, Left = 2, Right = 3 };

inline constexpr int kActionCount = 4;
inline constexpr std::array<Action, kActionCount> kActions{Action::Forward, Action::Backward, Action::Left,
                                                           Action::Right};

inline constexpr Cell apply(Cell c, Action a) {
  switch (a) {
    case Action::Forward: return {c.x, c.y + 1};
    case Action::Backward: return {c.x, c.y - 1};
    case Action::Left: return {c.x - 1, c.y};
    case Action::Right: return {c.x + 1, c.y};
  }
  return c;
}

enum class DecayGranularity { PerStep, PerEpisode };

struct QConfig {
  double alpha = 0.9;
  double gamma = 0.9;
  double epsilon0 = 0.9;
  double epsilon_decay = 0.9;
  double epsilon_min = 0.0;
  DecayGranularity decay_granularity = DecayGranularity::PerStep;
  double max_reward = 100.0;
  double risk_step_penalty = 0.0;  // reward per step taken into a risk cell is minus this
  int max_steps_per_episode = 0;  // 0: twice the free-cell count
  int max_episodes = 5000;
  double q_init_lo = 0.0;
  double q_init_hi = 0.01;
  double convergence_spread = 0.05;
  int window_min = 20;
  int window_max = 2000;
  double avg_distance_expected = 0.0;  // 0: grid_size / sqrt(max(num_obstacles, 1))
  // Dynamic training gives up after this many consecutive step-limit episodes with
  // the same reward (greedy agent looping in a dead pocket). 0 disables.
  int stall_episodes = 50;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0, 1)");
    if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon0 && epsilon0 <= 1.0))
      throw std::invalid_argument("need 0 <= epsilon_min <= epsilon0 <= 1");
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw std::invalid_argument("epsilon_decay must be in (0, 1]");
    if (max_episodes < 1) throw std::invalid_argument("max_episodes must be positive");
    if (q_init_lo > q_init_hi) throw std::invalid_argument("empty q_init range");
    if (window_min < 1 || window_max < window_min) throw std::invalid_argument("bad window clamp");
    if (stall_episodes < 0) throw std::invalid_argument("stall_episodes must be non-negative");
  }

  int step_limit(const CostMap& cost) const {
    return max_steps_per_episode > 0 ? max_steps_per_episode
                                     : std::max(1, 2 * static_cast<int>(cost.free_cell_count()));
  }
};

class QTable {
 public:
  QTable() = default;
  QTable(int width, int height, double fill = 0.0)
      : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height * kActionCount, fill) {}

  static QTable random(int width, int height, double lo, double hi, Rng& rng) {
    QTable q(width, height);
    for (double& v : q.values_) v = rng.uniform(lo, hi);
    return q;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool in_bounds(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

  double& at(Cell c, Action a) { return values_[slot(c) + static_cast<std::size_t>(a)]; }
  double at(Cell c, Action a) const { return values_[slot(c) + static_cast<std::size_t>(a)]; }

  double max_value(Cell c) const {
    const double* v = &values_[slot(c)];
    return std::max(std::max(v[0], v[1]), std::max(v[2], v[3]));
  }

  // First action in kActions order among the maxima.
  Action greedy(Cell c) const {
    const double* v = &values_[slot(c)];
    int best = 0;
    for (int i = 1; i < kActionCount; ++i)
      if (v[i] > v[best]) best = i;
    return static_cast<Action>(best);
  }

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t bytes() const noexcept { return values_.size() * sizeof(double); }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t slot(Cell c) const noexcept {
    return (static_cast<std::size_t>(c.y) * width_ + c.x) * kActionCount;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

struct ActionChoice {
  Action action;
  double epsilon;  // decayed value for the next step
};

inline double decay_epsilon(double epsilon, const QConfig& cfg) {
  return std::max(epsilon * cfg.epsilon_decay, cfg.epsilon_min);
}

// Epsilon-greedy selection followed by one decay of epsilon.
inline ActionChoice select_action(const QTable& q, Cell s, double epsilon, const QConfig& cfg, Rng& rng) {
  Action a;
  if (rng.uniform() < epsilon) a = static_cast<Action>(rng.below(kActionCount));
  else a = q.greedy(s);
  return {a, decay_epsilon(epsilon, cfg)};
}

enum class StepStatus { Goal, Collision, Other };

inline double reward(StepStatus status, int steps_so_far, const QConfig& cfg, bool in_risk_zone) {
  switch (status) {
    case StepStatus::Goal: return cfg.max_reward / steps_so_far;
    case StepStatus::Collision: return -1.0;
    case StepStatus::Other: return in_risk_zone ? -cfg.risk_step_penalty : 0.0;
  }
  return 0.0;
}

// One-step Q-learning backup; terminal transitions bootstrap from zero.
inline void update_q(QTable& q, Cell s, Action a, double r, std::optional<Cell> next, const QConfig& cfg) {
  const double future = next ? q.max_value(*next) : 0.0;
  double& v = q.at(s, a);
  v += cfg.alpha * (r + cfg.gamma * future - v);
}

enum class EpisodeOutcome { ReachedGoal, Collided, StepLimit };

struct EpisodeResult {
  double total_reward = 0.0;
  int steps = 0;
  EpisodeOutcome outcome = EpisodeOutcome::StepLimit;
};

struct EpisodeRun {
  EpisodeResult result;
  double epsilon_out = 0.0;
};

// Steps into hard-blocked or out-of-bounds cells are collisions and end the episode
// without moving.
inline EpisodeRun run_episode(const CostMap& cost, Cell start, Cell goal, QTable& q, const QConfig& cfg,
                              double epsilon, Rng& rng) {
  EpisodeRun run;
  EpisodeResult& res = run.result;
  if (start == goal) {
    res = {cfg.max_reward, 1, EpisodeOutcome::ReachedGoal};
    run.epsilon_out = cfg.decay_granularity == DecayGranularity::PerEpisode ? decay_epsilon(epsilon, cfg) : epsilon;
    return run;
  }
  const int limit = cfg.step_limit(cost);
  const bool per_step = cfg.decay_granularity == DecayGranularity::PerStep;
  Cell s = start;
  while (true) {
    const ActionChoice choice = select_action(q, s, epsilon, cfg, rng);
    if (per_step) epsilon = choice.epsilon;
    const Cell next = apply(s, choice.action);
    ++res.steps;
    if (cost.blocked(next)) {
      const double r = reward(StepStatus::Collision, res.steps, cfg, false);
      update_q(q, s, choice.action, r, std::nullopt, cfg);
      res.total_reward += r;
      res.outcome = EpisodeOutcome::Collided;
      break;
    }
    if (next == goal) {
      const double r = reward(StepStatus::Goal, res.steps, cfg, false);
      update_q(q, s, choice.action, r, std::nullopt, cfg);
      res.total_reward += r;
      res.outcome = EpisodeOutcome::ReachedGoal;
      break;
    }
    const double r = reward(StepStatus::Other, res.steps, cfg, cost.risk(next));
    update_q(q, s, choice.action, r, next, cfg);
    res.total_reward += r;
    s = next;
    if (res.steps >= limit) {
      res.outcome = EpisodeOutcome::StepLimit;
      break;
    }
  }
  run.epsilon_out = per_step ? epsilon : decay_epsilon(epsilon, cfg);
  return run;
}

struct RewardTrace {
  std::vector<double> per_episode_reward;
  std::vector<EpisodeOutcome> outcomes;

  std::size_t size() const noexcept { return per_episode_reward.size(); }

  // Trailing mean over up to `window` episodes ending at each index.
  std::vector<double> moving_average(std::size_t window) const {
    std::vector<double> out(per_episode_reward.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < per_episode_reward.size(); ++i) {
      sum += per_episode_reward[i];
      if (i >= window) sum -= per_episode_reward[i - window];
      out[i] = sum / static_cast<double>(std::min(i + 1, window));
    }
    return out;
  }
};

inline void write_reward_csv(std::ostream& out, const RewardTrace& trace, std::size_t window) {
  const auto avg = trace.moving_average(std::max<std::size_t>(window, 1));
  out << "episode,reward,moving_avg\n";
  char buf[96];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", i + 1, trace.per_episode_reward[i], avg[i]);
    out << buf;
  }
}

// --- Environment complexity ---------------------------------------------------

struct SdfResult {
  double sdf = 0.0;
  double avg_distance_current = 0.0;
};

inline int grid_size(const KnownMap& map) { return std::max(map.width(), map.height()); }

namespace detail {

// Nearest other occupied cell by expanding Chebyshev rings on the grid.
inline double nearest_occupied_distance(const KnownMap& map, Cell from) {
  double best = std::numeric_limits<double>::infinity();
  const int max_ring = std::max(map.width(), map.height());
  for (int r = 1; r <= max_ring; ++r) {
    if (r > best) break;  // every cell on ring r is at least r away
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        const Cell c{from.x + dx, from.y + dy};
        if (map.in_bounds(c) && map.at(c) == CellState::Occupied) best = std::min(best, std::hypot(dx, dy));
      }
  }
  return best;
}

}  // namespace detail

inline SdfResult sdf(const KnownMap& map, double avg_distance_expected) {
  if (!(avg_distance_expected > 0.0)) throw std::invalid_argument("avg_distance_expected must be positive");
  const auto obstacles = map.cells_in(CellState::Occupied);
  const double g = grid_size(map);
  SdfResult out;
  if (obstacles.size() < 2) {
    out.avg_distance_current = g;
  } else {
    double sum = 0.0;
    for (Cell c : obstacles) sum += detail::nearest_occupied_distance(map, c);
    out.avg_distance_current = sum / static_cast<double>(obstacles.size());
  }
  out.sdf = out.avg_distance_current / avg_distance_expected * g;
  return out;
}

struct ComplexityReport {
  std::size_t num_obstacles = 0;
  int grid_size = 0;
  double goal_distance = 0.0;
  double avg_distance_expected = 0.0;
  double avg_distance_current = 0.0;
  double sdf = 0.0;
  double max_sdf = 0.0;
  double complexity = 0.0;
  int window = 0;
};

inline double default_avg_distance_expected(const KnownMap& map) {
  const double n = static_cast<double>(std::max<std::size_t>(map.count(CellState::Occupied), 1));
  return grid_size(map) / std::sqrt(n);
}

inline int convergence_window(double complexity, int lo = 20, int hi = 2000) {
  const double r = std::round(complexity);
  if (!(r >= lo)) return lo;
  if (r >= hi) return hi;
  return static_cast<int>(r);
}

inline ComplexityReport complexity(const KnownMap& map, Cell start, Cell goal, double avg_distance_expected,
                                   int window_min = 20, int window_max = 2000) {
  if (!(avg_distance_expected > 0.0)) throw std::invalid_argument("avg_distance_expected must be positive");
  ComplexityReport rep;
  rep.num_obstacles = map.count(CellState::Occupied);
  rep.grid_size = grid_size(map);
  rep.goal_distance = euclidean(start, goal);
  rep.avg_distance_expected = avg_distance_expected;
  const SdfResult s = sdf(map, avg_distance_expected);
  rep.avg_distance_current = s.avg_distance_current;
  rep.sdf = s.sdf;
  const double g = rep.grid_size;
  rep.max_sdf = g * std::numbers::sqrt2 / avg_distance_expected * g;
  rep.complexity = (static_cast<double>(rep.num_obstacles) / (g * g)) *
                   (rep.goal_distance * rep.goal_distance / avg_distance_expected) * (rep.sdf / rep.max_sdf);
  rep.window = convergence_window(rep.complexity, window_min, window_max);
  return rep;
}

inline nlohmann::json to_json(const ComplexityReport& r) {
  return {{"num_obstacles", r.num_obstacles},
          {"grid_size", r.grid_size},
          {"goal_distance", r.goal_distance},
          {"avg_distance_expected", r.avg_distance_expected},
          {"avg_distance_current", r.avg_distance_current},
          {"sdf", r.sdf},
          {"max_sdf", r.max_sdf},
          {"complexity", r.complexity},
          {"window", r.window}};
}

// --- Policy extraction ----------------------------------------------------------

enum class PolicyError { NoPolicyPath };

struct PolicyPath {
  std::optional<DiscretePath> path;
  bool ok() const noexcept { return path.has_value(); }
};

inline int default_rollout_limit(const CostMap& cost) { return std::max(1, 4 * static_cast<int>(cost.free_cell_count())); }

// Greedy rollout from start; fails on a revisit, a blocked step, or the length limit.
inline PolicyPath extract_path(const QTable& q, const CostMap& cost, Cell start, Cell goal, int max_len = 0) {
  if (max_len <= 0) max_len = default_rollout_limit(cost);
  DiscretePath path{start};
  if (start == goal) return {path};
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(cost.width()) * cost.height(), 0);
  seen[cost.known().index(start)] = 1;
  Cell s = start;
  while (static_cast<int>(path.size()) < max_len) {
    const Cell next = apply(s, q.greedy(s));
    if (cost.blocked(next)) return {};
    auto& mark = seen[cost.known().index(next)];
    if (mark) return {};
    mark = 1;
    path.push_back(next);
    if (next == goal) return {path};
    s = next;
  }
  return {};
}

// --- Training ---------------------------------------------------------------------

enum class TrainStatus { Ok, UnreachableGoal, Stalled };

struct TrainResult {
  QTable table;
  RewardTrace trace;
  int episodes_used = 0;
  bool converged = false;
  TrainStatus status = TrainStatus::Ok;
  ComplexityReport complexity;
};

namespace detail {

inline bool goal_reachable(const CostMap& cost, Cell start, Cell goal) {
  std::vector<char> seen(static_cast<std::size_t>(cost.width()) * cost.height(), 0);
  std::vector<Cell> stack{start};
  seen[cost.known().index(start)] = 1;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    if (c == goal) return true;
    for (Action a : kActions) {
      const Cell n = apply(c, a);
      if (cost.blocked(n) || seen[cost.known().index(n)]) continue;
      seen[cost.known().index(n)] = 1;
      stack.push_back(n);
    }
  }
  return false;
}

struct Trainer {
  const CostMap& cost;
  Cell start, goal;
  const QConfig& cfg;
  Rng rng;
  QTable table;
  double epsilon;

  Trainer(const CostMap& c, Cell s, Cell g, const QConfig& config, const QTable* warm)
      : cost(c), start(s), goal(g), cfg(config), rng(config.rng_seed), epsilon(config.epsilon0) {
    cfg.validate();
    if (cost.blocked(start) || cost.blocked(goal)) throw std::invalid_argument("start or goal is blocked");
    if (warm && warm->width() == cost.width() && warm->height() == cost.height()) table = *warm;
    else table = QTable::random(cost.width(), cost.height(), cfg.q_init_lo, cfg.q_init_hi, rng);
  }

  EpisodeResult step(RewardTrace& trace) {
    const EpisodeRun run = run_episode(cost, start, goal, table, cfg, epsilon, rng);
    epsilon = run.epsilon_out;
    trace.per_episode_reward.push_back(run.result.total_reward);
    trace.outcomes.push_back(run.result.outcome);
    return run.result;
  }
};

}  // namespace detail

inline ComplexityReport training_complexity(const CostMap& cost, Cell start, Cell goal, const QConfig& cfg) {
  const double expected =
      cfg.avg_distance_expected > 0.0 ? cfg.avg_distance_expected : default_avg_distance_expected(cost.known());
  return complexity(cost.known(), start, goal, expected, cfg.window_min, cfg.window_max);
}

// Trains until the last `window` episode rewards are stable, at least one of them
// reached the goal, and the greedy policy reaches the goal; or until max_episodes.
inline TrainResult train_dynamic(const CostMap& cost, Cell start, Cell goal, const QConfig& cfg,
                                 const QTable* warm = nullptr) {
  detail::Trainer t(cost, start, goal, cfg, warm);
  TrainResult out;
  out.complexity = training_complexity(cost, start, goal, cfg);
  const std::size_t window = static_cast<std::size_t>(out.complexity.window);
  auto& rewards = out.trace.per_episode_reward;
  std::size_t goals_in_window = 0;
  bool any_goal = false;
  int stall_run = 0;
  for (int e = 0; e < cfg.max_episodes; ++e) {
    const EpisodeResult r = t.step(out.trace);
    if (r.outcome == EpisodeOutcome::ReachedGoal) ++goals_in_window, any_goal = true;
    if (r.outcome != EpisodeOutcome::StepLimit) stall_run = 0;
    else if (stall_run > 0 && rewards[rewards.size() - 2] == r.total_reward) ++stall_run;
    else stall_run = 1;
    if (cfg.stall_episodes > 0 && stall_run >= cfg.stall_episodes) {
      out.status = any_goal || detail::goal_reachable(cost, start, goal) ? TrainStatus::Stalled : TrainStatus::UnreachableGoal;
      out.episodes_used = static_cast<int>(rewards.size());
      out.table = std::move(t.table);
      return out;
    }
    if (rewards.size() > window && out.trace.outcomes[rewards.size() - 1 - window] == EpisodeOutcome::ReachedGoal)
      --goals_in_window;
    if (rewards.size() < window || goals_in_window == 0) continue;
    const auto first = rewards.end() - static_cast<std::ptrdiff_t>(window);
    const auto [lo, hi] = std::minmax_element(first, rewards.end());
    double mean = 0.0;
    for (auto it = first; it != rewards.end(); ++it) mean += *it;
    mean /= static_cast<double>(window);
    if (*hi - *lo > cfg.convergence_spread * std::max(std::abs(mean), 1.0)) continue;
    if (!extract_path(t.table, cost, start, goal).ok()) continue;
    out.converged = true;
    break;
  }
  out.episodes_used = static_cast<int>(rewards.size());
  if (!any_goal) out.status = TrainStatus::UnreachableGoal;
  out.table = std::move(t.table);
  return out;
}

inline TrainResult train_fixed(const CostMap& cost, Cell start, Cell goal, const QConfig& cfg, int n_iterations,
                               const QTable* warm = nullptr) {
  if (n_iterations < 1) throw std::invalid_argument("n_iterations must be positive");
  detail::Trainer t(cost, start, goal, cfg, warm);
  TrainResult out;
  out.complexity = training_complexity(cost, start, goal, cfg);
  for (int e = 0; e < n_iterations; ++e) t.step(out.trace);
  out.episodes_used = n_iterations;
  out.table = std::move(t.table);
  return out;
}

}  // namespace qplan
