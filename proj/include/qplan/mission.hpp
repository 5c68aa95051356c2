#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qplan/gridworld.hpp"
#include "qplan/planner.hpp"
#include "qplan/sensing.hpp"

namespace qplan {

struct MissionConfig {
  PlannerSpec planner;
  SensorConfig sensor;
  CostMapConfig costmap;
  int max_replans = 100;
  // Check belief soundness against the truth at every tick (test/benchmark audit).
  bool audit_belief = true;

  void validate() const {
    sensor.validate();
    if (max_replans < 1) throw std::invalid_argument("max_replans must be at least 1");
  }
};

enum class MissionFailure { Unreachable, ReplanLimit, PlannerFailure };

inline const char* to_string(MissionFailure f) {
  switch (f) {
    case MissionFailure::Unreachable: return "Unreachable";
    case MissionFailure::ReplanLimit: return "ReplanLimit";
    case MissionFailure::PlannerFailure: return "PlannerFailure";
  }
  return "?";
}

struct TickLog {
  int tick = 0;
  Cell pose;
  bool replanned = false;
  double plan_time = 0.0;
};

struct MissionResult {
  bool success = false;
  std::optional<MissionFailure> failure;
  std::vector<Cell> traveled;
  double total_distance = 0.0;
  int replans = 0;
  std::vector<double> per_plan_times;
  KnownMap final_map;

  // Diagnostics
  std::vector<TickLog> ticks;
  std::vector<TrainingInfo> trainings;  // one per Q-learning plan call
  std::vector<DiscretePath> plans;
  std::size_t peak_mem_proxy = 0;
  bool belief_sound = true;
};

// Index (into `remaining`) of the first node that is hard-blocked or whose segment
// from the previous node crosses a hard-blocked cell. Risk cells never trigger.
inline std::optional<std::size_t> detect_conflict(const CostMap& cost, const std::vector<Cell>& remaining) {
  if (remaining.empty()) throw std::invalid_argument("detect_conflict needs a non-empty path");
  if (cost.blocked(remaining[0])) return 0;
  for (std::size_t i = 1; i < remaining.size(); ++i)
    if (!line_of_sight(cost, remaining[i - 1], remaining[i])) return i;
  return std::nullopt;
}

// Occupied-in-belief cells are truth-occupied and Free-in-belief cells are truth-free.
inline bool belief_sound(const KnownMap& map, const TruthEnvironment& truth) {
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const CellState s = map.at({x, y});
      if (s == CellState::Occupied && !truth.occupied({x, y})) return false;
      if (s == CellState::Free && truth.occupied({x, y})) return false;
    }
  return true;
}

namespace detail {

inline bool q_learning_failure_is_unreachable(PlanFailure f) {
  return f == PlanFailure::NoPath || f == PlanFailure::UnreachableGoal;
}

}  // namespace detail

// Sense, integrate, (re)plan on the belief when the current plan is missing or
// blocked, advance one cell; repeat until the goal or a failure. Scans are written
// to `scan_log` as JSON lines when given.
inline MissionResult run_mission(const TruthEnvironment& truth, const MissionConfig& cfg, const PlannerConfigs& planners,
                                 std::uint64_t seed, std::ostream* scan_log = nullptr) {
  cfg.validate();
  truth.validate();
  MissionResult res;
  KnownMap known(truth.width(), truth.height());
  Cell pos = truth.start();
  res.traveled.push_back(pos);

  std::vector<Cell> plan_cells;
  std::size_t plan_index = 0;
  int plans_made = 0;
  std::optional<QTable> last_table;
  const long long max_ticks =
      static_cast<long long>(cfg.max_replans + 1) * 4LL * truth.width() * truth.height();

  for (int tick = 0;; ++tick) {
    const Scan sc = scan(truth, pos, cfg.sensor);
    if (scan_log) write_scan_line(*scan_log, sc);
    integrate_scan(known, sc);
    known.set(pos, CellState::Free);
    if (cfg.audit_belief && !belief_sound(known, truth)) res.belief_sound = false;
    if (pos == truth.goal()) {
      res.success = true;
      break;
    }
    if (tick >= max_ticks) {
      res.failure = MissionFailure::ReplanLimit;
      break;
    }

    TickLog log{tick, pos, false, 0.0};
    const CostMap cost = build_costmap(known, cfg.costmap);
    const bool need_plan =
        plan_cells.empty() ||
        detect_conflict(cost, std::vector<Cell>(plan_cells.begin() + static_cast<std::ptrdiff_t>(plan_index), plan_cells.end()))
            .has_value();
    if (need_plan) {
      if (plans_made > 0 && ++res.replans > cfg.max_replans) {
        res.failure = MissionFailure::ReplanLimit;
        break;
      }
      const std::uint64_t plan_seed = mix_seed(seed, static_cast<std::uint64_t>(plans_made));
      std::optional<DiscretePath> path;
      std::optional<PlanFailure> failure;
      double plan_time = 0.0;
      // Second attempt relaxes the risk penalty.
      for (int attempt = 0; attempt < 2 && !path; ++attempt) {
        PlannerConfigs pc = planners;
        CostMap attempt_cost = cost;
        if (attempt == 1) {
          attempt_cost = cost.with_risk_penalty(0.0);
          pc.q.risk_step_penalty = 0.0;
        }
        QTable table;
        const bool warm = planners.warm_start && last_table.has_value();
        PlanOutcome out = plan(cfg.planner, attempt_cost, pos, truth.goal(), pc, mix_seed(plan_seed, attempt),
                               warm ? &*last_table : nullptr, cfg.planner.is_qlearning() ? &table : nullptr);
        plan_time += out.result.planning_time;
        res.peak_mem_proxy = std::max(res.peak_mem_proxy, out.result.mem_proxy_bytes);
        if (out.training) res.trainings.push_back(std::move(*out.training));
        if (cfg.planner.is_qlearning()) last_table = std::move(table);
        if (!out.result.success()) {
          failure = out.result.failure;
          continue;
        }
        if (!out.result.cells.empty()) path = std::move(out.result.cells);
        else path = rasterize(attempt_cost, out.result.waypoints);
        if (!path) failure = PlanFailure::NoCollisionFreeSolution;
      }
      ++plans_made;
      res.per_plan_times.push_back(plan_time);
      log.replanned = true;
      log.plan_time = plan_time;
      if (!path) {
        res.failure = failure && detail::q_learning_failure_is_unreachable(*failure) ? MissionFailure::Unreachable
                                                                                     : MissionFailure::PlannerFailure;
        res.ticks.push_back(log);
        break;
      }
      plan_cells = std::move(*path);
      plan_index = 0;
      res.plans.push_back(plan_cells);
    }
    if (plan_index + 1 >= plan_cells.size()) {
      // Plan ended away from the goal; force a replan next tick.
      plan_cells.clear();
      res.ticks.push_back(log);
      continue;
    }
    const Cell next = plan_cells[++plan_index];
    if (truth.occupied(next)) throw std::logic_error("mission stepped into an occupied cell");
    pos = next;
    res.traveled.push_back(pos);
    res.ticks.push_back(log);
  }
  res.total_distance = static_cast<double>(res.traveled.size() - 1);
  res.final_map = std::move(known);
  return res;
}

// One JSON line per tick: {"tick":..,"pose":[x,y],"replanned":..,"plan_time_s":..}.
inline void write_mission_log(std::ostream& out, const MissionResult& r, bool include_timing = true) {
  for (const TickLog& t : r.ticks) {
    nlohmann::json j{{"tick", t.tick}, {"pose", {t.pose.x, t.pose.y}}, {"replanned", t.replanned}};
    if (include_timing) j["plan_time_s"] = t.plan_time;
    out << j.dump() << '\n';
  }
}

inline nlohmann::json mission_summary_json(const MissionResult& r, bool include_timing = true) {
  nlohmann::json traveled = nlohmann::json::array();
  for (Cell c : r.traveled) traveled.push_back({c.x, c.y});
  nlohmann::json j{{"success", r.success},
                   {"failure", r.failure ? nlohmann::json(to_string(*r.failure)) : nlohmann::json(nullptr)},
                   {"traveled", traveled},
                   {"total_distance", r.total_distance},
                   {"replans", r.replans},
                   {"belief_sound", r.belief_sound}};
  if (include_timing) j["per_plan_times"] = r.per_plan_times;
  nlohmann::json occupied = nlohmann::json::array();
  for (Cell c : r.final_map.cells_in(CellState::Occupied)) occupied.push_back({c.x, c.y});
  j["final_map"] = {{"width", r.final_map.width()},
                    {"height", r.final_map.height()},
                    {"known_free", r.final_map.count(CellState::Free)},
                    {"occupied", occupied}};
  return j;
}

}  // namespace qplan
