#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qplan/mission.hpp"
#include "qplan/smoothing.hpp"
#include "qplan/svg.hpp"

namespace qplan {

struct BenchRecord {
  std::string env;
  std::string planner;
  std::uint64_t seed = 0;
  bool success = false;
  std::optional<double> distance;  // smoothed trajectory length, m
  double plan_time = 0.0;          // s, wall clock summed over the mission's plan calls
  std::size_t peak_mem_proxy = 0;  // bytes
  double cpu_time = 0.0;           // s, CPU clock of the worker running the mission
  int replans = 0;
  std::optional<std::string> failure;
  std::vector<int> episodes_used;  // per Q-learning plan call

  // Artifacts for reports and audits.
  bool safe = true;          // no traveled cell is truth-occupied
  bool belief_sound = true;  // belief soundness held at every tick
  std::vector<Cell> traveled;
  std::vector<Point> smoothed;
  std::optional<RewardTrace> first_trace;
  int first_window = 20;
};

struct BenchOptions {
  PlannerConfigs planners;
  MissionConfig mission;  // planner field is overridden per run
  SmoothingConfig smoothing;
  // Run repetitions on one thread so timings are not skewed by oversubscription.
  bool serial_timing = false;
  unsigned workers = 0;  // 0: hardware concurrency
};

namespace detail {

inline double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + ts.tv_nsec * 1e-9;
}

// Map where only cells seen free are traversable; used to smooth the flown path
// without shortcutting through unexplored space.
inline CostMap explored_costmap(const KnownMap& known, const CostMapConfig& cfg) {
  KnownMap m = known;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at({x, y}) == CellState::Unknown) m.set({x, y}, CellState::Occupied);
  return build_costmap(m, cfg);
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

inline BenchRecord run_repetition(const TruthEnvironment& env, const PlannerSpec& planner, std::uint64_t seed,
                                  const BenchOptions& opts) {
  const double cpu0 = detail::thread_cpu_seconds();
  MissionConfig mc = opts.mission;
  mc.planner = planner;
  MissionResult m = run_mission(env, mc, opts.planners, seed);

  BenchRecord rec;
  rec.env = env.name();
  rec.planner = planner.name();
  rec.seed = seed;
  rec.success = m.success;
  rec.replans = m.replans;
  if (m.failure) rec.failure = to_string(*m.failure);
  for (double t : m.per_plan_times) rec.plan_time += t;
  rec.peak_mem_proxy = m.peak_mem_proxy;
  for (const auto& t : m.trainings) rec.episodes_used.push_back(t.episodes_used);
  if (!m.trainings.empty()) {
    rec.first_trace = m.trainings.front().trace;
    rec.first_window = m.trainings.front().complexity.window;
  }
  for (Cell c : m.traveled) rec.safe = rec.safe && !env.occupied(c);
  rec.belief_sound = m.belief_sound;
  rec.traveled = m.traveled;
  if (m.success) {
    const CostMap explored = detail::explored_costmap(m.final_map, mc.costmap);
    const SmoothResult sm = smooth_pipeline(m.traveled, explored, opts.smoothing);
    rec.smoothed = sm.trajectory.points();
    rec.distance = sm.trajectory.length();
  }
  rec.cpu_time = detail::thread_cpu_seconds() - cpu0;
  return rec;
}

// Records ordered by environment, then planner, then repetition; seed_i = base_seed + i.
inline std::vector<BenchRecord> run_benchmark(const std::vector<TruthEnvironment>& envs,
                                              const std::vector<PlannerSpec>& planners, int repetitions,
                                              std::uint64_t base_seed, const BenchOptions& opts = {}) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  const std::size_t reps = static_cast<std::size_t>(repetitions);
  const std::size_t total = envs.size() * planners.size() * reps;
  std::vector<BenchRecord> records(total);
  const unsigned workers =
      opts.serial_timing ? 1u : (opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency()));
  detail::parallel_for(total, workers, [&](std::size_t k) {
    const std::size_t e = k / (planners.size() * reps);
    const std::size_t p = (k / reps) % planners.size();
    const std::size_t i = k % reps;
    records[k] = run_repetition(envs[e], planners[p], base_seed + i, opts);
  });
  return records;
}

struct SummaryRow {
  std::string env;
  std::string planner;
  std::size_t repetitions = 0;
  std::size_t successes = 0;
  std::optional<double> avg_distance;
  std::optional<double> std_distance;
  double avg_time = 0.0;
  double std_time = 0.0;
  std::optional<double> best_time;  // over successful runs
  double mem_proxy = 0.0;
  double cpu_time = 0.0;
  double completeness = 0.0;  // percent
};

using BenchSummary = std::vector<SummaryRow>;

namespace detail {

// Mean and population standard deviation.
inline std::pair<double, double> moments(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace detail

// Groups by (env, planner) in first-appearance order.
inline BenchSummary summarize(const std::vector<BenchRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one record");
  BenchSummary out;
  std::map<std::pair<std::string, std::string>, std::vector<const BenchRecord*>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : records) {
    auto key = std::make_pair(r.env, r.planner);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  for (const auto& key : order) {
    const auto& g = groups[key];
    SummaryRow row;
    row.env = key.first;
    row.planner = key.second;
    row.repetitions = g.size();
    std::vector<double> dist, times, mem, cpu;
    for (const BenchRecord* r : g) {
      times.push_back(r->plan_time);
      mem.push_back(static_cast<double>(r->peak_mem_proxy));
      cpu.push_back(r->cpu_time);
      if (r->success) {
        ++row.successes;
        if (r->distance) dist.push_back(*r->distance);
        row.best_time = row.best_time ? std::min(*row.best_time, r->plan_time) : r->plan_time;
      }
    }
    if (!dist.empty()) std::tie(row.avg_distance, row.std_distance) = detail::moments(dist);
    std::tie(row.avg_time, row.std_time) = detail::moments(times);
    row.mem_proxy = detail::moments(mem).first;
    row.cpu_time = detail::moments(cpu).first;
    row.completeness = 100.0 * static_cast<double>(row.successes) / static_cast<double>(row.repetitions);
    out.push_back(std::move(row));
  }
  return out;
}

struct ReportOptions {
  // Timing columns are host-dependent; leave them blank for byte-reproducible reports.
  bool include_timing = true;
  bool reward_curves = true;
  bool svgs = true;
};

inline const char* kSummaryHeader =
    "env,planner,avg_dist_m,std_dist_m,avg_time_s,std_time_s,best_time_s,mem_proxy_b,cpu_s,completeness_pct";

inline std::string summary_csv(const BenchSummary& summary, bool include_timing = true) {
  std::string out = std::string(kSummaryHeader) + "\n";
  char buf[64];
  auto num = [&](std::optional<double> v, const char* fmt = "%.4f") -> std::string {
    if (!v) return "";
    std::snprintf(buf, sizeof buf, fmt, *v);
    return buf;
  };
  auto timed = [&](std::optional<double> v) { return include_timing ? num(v, "%.6f") : std::string(); };
  for (const auto& r : summary) {
    out += r.env + "," + r.planner + "," + num(r.avg_distance) + "," + num(r.std_distance) + "," + timed(r.avg_time) +
           "," + timed(r.std_time) + "," + timed(r.best_time) + "," + num(r.mem_proxy, "%.0f") + "," +
           timed(r.cpu_time) + "," + num(r.completeness, "%.1f") + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const BenchRecord& r, bool include_timing = true) {
  nlohmann::json j{{"env", r.env},
                   {"planner", r.planner},
                   {"seed", r.seed},
                   {"success", r.success},
                   {"distance_m", r.distance ? nlohmann::json(*r.distance) : nlohmann::json(nullptr)},
                   {"peak_mem_proxy_b", r.peak_mem_proxy},
                   {"replans", r.replans},
                   {"episodes_used", r.episodes_used},
                   {"failure", r.failure ? nlohmann::json(*r.failure) : nlohmann::json(nullptr)}};
  if (include_timing) {
    j["plan_time_s"] = r.plan_time;
    j["cpu_time_s"] = r.cpu_time;
  }
  return j;
}

inline std::string file_safe(std::string s) {
  for (char& c : s)
    if (c == ':' || c == '/' || c == ' ') c = '-';
  return s;
}

// Writes summary.csv, records.jsonl, reward_curves/*.csv and <env>__<planner>.svg.
inline void emit_reports(const BenchSummary& summary, const std::vector<BenchRecord>& records,
                         const std::vector<TruthEnvironment>& envs, const std::filesystem::path& out_dir,
                         const ReportOptions& opts = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };
  open(out_dir / "summary.csv") << summary_csv(summary, opts.include_timing);
  {
    auto f = open(out_dir / "records.jsonl");
    for (const auto& r : records) f << to_json(r, opts.include_timing).dump() << '\n';
  }
  if (opts.reward_curves) {
    for (const auto& r : records) {
      if (!r.first_trace) continue;
      fs::create_directories(out_dir / "reward_curves", ec);
      auto f = open(out_dir / "reward_curves" /
                    (file_safe(r.env) + "__" + file_safe(r.planner) + "__seed" + std::to_string(r.seed) + ".csv"));
      write_reward_csv(f, *r.first_trace, static_cast<std::size_t>(r.first_window));
    }
  }
  if (opts.svgs) {
    std::map<std::pair<std::string, std::string>, bool> drawn;
    for (const auto& r : records) {
      if (!r.success || drawn[{r.env, r.planner}]) continue;
      const auto env = std::find_if(envs.begin(), envs.end(), [&](const auto& e) { return e.name() == r.env; });
      if (env == envs.end()) continue;
      drawn[{r.env, r.planner}] = true;
      std::vector<Point> raw;
      for (Cell c : r.traveled) raw.push_back(center(c));
      open(out_dir / (file_safe(r.env) + "__" + file_safe(r.planner) + ".svg")) << render_svg(*env, raw, r.smoothed);
    }
  }
}

}  // namespace qplan
