#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qplan/baselines.hpp"
#include "qplan/qplanner.hpp"

namespace qplan {

enum class PlannerKind { AStar, RRT, PSO, QLearnDynamic, QLearnFixed };

// Planner selected by name: astar | rrt | pso | qlearn-dyn | qlearn-fixed:N
struct PlannerSpec {
  PlannerKind kind = PlannerKind::AStar;
  int fixed_episodes = 0;

  static PlannerSpec parse(std::string_view name) {
    if (name == "astar") return {PlannerKind::AStar};
    if (name == "rrt") return {PlannerKind::RRT};
    if (name == "pso") return {PlannerKind::PSO};
    if (name == "qlearn-dyn") return {PlannerKind::QLearnDynamic};
    constexpr std::string_view fixed = "qlearn-fixed:";
    if (name.starts_with(fixed)) {
      const std::string_view digits = name.substr(fixed.size());
      int n = 0;
      const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
      if (ec == std::errc{} && end == digits.data() + digits.size() && n >= 1) return {PlannerKind::QLearnFixed, n};
    }
    throw std::invalid_argument("unknown planner '" + std::string(name) +
                                "' (expected astar, rrt, pso, qlearn-dyn or qlearn-fixed:N)");
  }

  std::string name() const {
    switch (kind) {
      case PlannerKind::AStar: return "astar";
      case PlannerKind::RRT: return "rrt";
      case PlannerKind::PSO: return "pso";
      case PlannerKind::QLearnDynamic: return "qlearn-dyn";
      case PlannerKind::QLearnFixed: return "qlearn-fixed:" + std::to_string(fixed_episodes);
    }
    return "?";
  }

  bool is_qlearning() const noexcept { return kind == PlannerKind::QLearnDynamic || kind == PlannerKind::QLearnFixed; }
};

struct PlannerConfigs {
  AStarConfig astar;
  RRTConfig rrt;
  PSOConfig pso;
  QConfig q;
  bool warm_start = false;  // Q-learning: seed replans with the previous table
};

// Q-learning side information from one plan call.
struct TrainingInfo {
  int episodes_used = 0;
  bool converged = false;
  ComplexityReport complexity;
  RewardTrace trace;
};

struct PlanOutcome {
  PlanResult result;
  std::optional<TrainingInfo> training;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Runs the named planner. Q-learning trains from scratch (or from `warm` when given)
// and reports the whole training time as planning time.
inline PlanOutcome plan(const PlannerSpec& spec, const CostMap& cost, Cell start, Cell goal, const PlannerConfigs& cfgs,
                        std::uint64_t seed, const QTable* warm = nullptr, QTable* table_out = nullptr) {
  PlanOutcome out;
  Rng rng(seed);
  switch (spec.kind) {
    case PlannerKind::AStar: out.result = astar(cost, start, goal, cfgs.astar); break;
    case PlannerKind::RRT: out.result = rrt(cost, start, goal, cfgs.rrt, rng); break;
    case PlannerKind::PSO: out.result = pso(cost, start, goal, cfgs.pso, rng); break;
    case PlannerKind::QLearnDynamic:
    case PlannerKind::QLearnFixed: {
      detail::Stopwatch clock;
      PlanResult& res = out.result;
      if (cost.blocked(start) || cost.blocked(goal)) {
        res.failure = PlanFailure::BadInput;
        return out;
      }
      QConfig q = cfgs.q;
      q.rng_seed = seed;
      TrainResult tr = spec.kind == PlannerKind::QLearnDynamic
                           ? train_dynamic(cost, start, goal, q, warm)
                           : train_fixed(cost, start, goal, q, spec.fixed_episodes, warm);
      res.expanded_or_iterations = tr.episodes_used;
      res.mem_proxy_bytes = tr.table.bytes();
      if (tr.status == TrainStatus::UnreachableGoal) {
        res.failure = PlanFailure::UnreachableGoal;
      } else if (auto path = extract_path(tr.table, cost, start, goal); path.ok()) {
        res.cells = std::move(*path.path);
        res.waypoints = detail::centers(res.cells);
      } else {
        res.failure = PlanFailure::NoPolicyPath;
      }
      res.planning_time = clock.seconds();
      out.training = TrainingInfo{tr.episodes_used, tr.converged, tr.complexity, std::move(tr.trace)};
      if (table_out) *table_out = std::move(tr.table);
      break;
    }
  }
  return out;
}

}  // namespace qplan
