#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qplan/qplan.hpp"

namespace fs = std::filesystem;
using namespace qplan;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A bundled name (indoor, outdoor, simple, complex) or a .txt/.json file.
TruthEnvironment resolve_env(const std::string& spec) {
  try {
    if (fs::exists(spec)) return load_environment(spec);
    return fixtures::by_name(spec);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

PlannerSpec resolve_planner(const std::string& name) {
  try {
    return PlannerSpec::parse(name);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

struct Common {
  std::uint64_t seed = 42;
  double sensor_range = 8.0;
  int max_replans = 100;
  bool warm_start = false;

  PlannerConfigs planners() const {
    PlannerConfigs pc;
    pc.warm_start = warm_start;
    return pc;
  }
  MissionConfig mission(const PlannerSpec& p) const {
    MissionConfig mc;
    mc.planner = p;
    mc.sensor.range = sensor_range;
    mc.max_replans = max_replans;
    return mc;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "base random seed");
  cmd->add_option("--sensor-range", c.sensor_range, "lidar range in cells");
  cmd->add_option("--max-replans", c.max_replans);
  cmd->add_flag("--warm-start", c.warm_start, "Q-learning replans start from the previous table");
}

int cmd_bench(const std::string& env_arg, const std::string& planner_arg, int reps, const std::string& out,
              bool serial, bool no_timing, unsigned workers, const Common& c) {
  std::vector<TruthEnvironment> envs;
  for (const auto& e : split(env_arg, ',')) envs.push_back(resolve_env(e));
  std::vector<PlannerSpec> planners;
  for (const auto& p : split(planner_arg, ',')) planners.push_back(resolve_planner(p));
  if (envs.empty() || planners.empty()) throw ConfigError("need at least one environment and one planner");
  if (reps < 1) throw ConfigError("--reps must be at least 1");

  BenchOptions opts;
  opts.planners = c.planners();
  opts.mission = c.mission(planners.front());
  opts.serial_timing = serial;
  opts.workers = workers;
  const auto records = run_benchmark(envs, planners, reps, c.seed, opts);
  const auto summary = summarize(records);
  ReportOptions ro;
  ro.include_timing = !no_timing;
  emit_reports(summary, records, envs, out, ro);
  std::cout << summary_csv(summary, ro.include_timing);
  return kOk;
}

int cmd_plan(const std::string& env_arg, const std::string& planner_arg, const std::string& svg,
             const std::string& csv, const Common& c) {
  const TruthEnvironment env = resolve_env(env_arg);
  const PlannerSpec spec = resolve_planner(planner_arg);
  const CostMap cost = build_costmap(env);
  const PlanOutcome out = plan(spec, cost, env.start(), env.goal(), c.planners(), c.seed);
  nlohmann::json j{{"env", env.name()},
                   {"planner", spec.name()},
                   {"seed", c.seed},
                   {"success", out.result.success()},
                   {"plan_time_s", out.result.planning_time},
                   {"mem_proxy_b", out.result.mem_proxy_bytes}};
  if (!out.result.success()) {
    j["failure"] = to_string(*out.result.failure);
    std::cout << j.dump(2) << '\n';
    return kFailed;
  }
  const SmoothResult sm = out.result.cells.empty() ? smooth_pipeline(out.result.waypoints, cost)
                                                   : smooth_pipeline(out.result.cells, cost);
  j["raw_length_m"] = polyline_length(out.result.waypoints);
  j["smoothed_length_m"] = sm.trajectory.length();
  if (out.training) j["episodes_used"] = out.training->episodes_used;
  if (!svg.empty()) open_out(svg) << render_svg(env, out.result.waypoints, sm.trajectory.points());
  if (!csv.empty()) {
    auto f = open_out(csv);
    write_trajectory_csv(f, sm.trajectory);
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_mission(const std::string& env_arg, const std::string& planner_arg, const std::string& log,
                const std::string& summary, const std::string& scan_dump, bool no_timing, const Common& c) {
  const TruthEnvironment env = resolve_env(env_arg);
  const MissionConfig mc = c.mission(resolve_planner(planner_arg));
  std::optional<std::ofstream> scans;
  if (!scan_dump.empty()) scans = open_out(scan_dump);
  const MissionResult r = run_mission(env, mc, c.planners(), c.seed, scans ? &*scans : nullptr);
  if (!log.empty()) {
    auto f = open_out(log);
    write_mission_log(f, r, !no_timing);
  }
  const auto j = mission_summary_json(r, !no_timing);
  if (!summary.empty()) open_out(summary) << j.dump(2) << '\n';
  std::cout << "success=" << (r.success ? "true" : "false") << " replans=" << r.replans
            << " distance=" << r.total_distance;
  if (r.failure) std::cout << " failure=" << to_string(*r.failure);
  std::cout << '\n';
  return r.success ? kOk : kFailed;
}

int cmd_reward_curve(const std::string& env_arg, const std::string& mode, const std::string& csv, const Common& c) {
  const TruthEnvironment env = resolve_env(env_arg);
  const CostMap cost = build_costmap(env);
  QConfig q;
  q.rng_seed = c.seed;
  TrainResult tr;
  if (mode == "dyn") {
    tr = train_dynamic(cost, env.start(), env.goal(), q);
  } else {
    const PlannerSpec spec = resolve_planner("qlearn-" + mode);
    if (spec.kind != PlannerKind::QLearnFixed) throw ConfigError("--mode must be dyn or fixed:N");
    tr = train_fixed(cost, env.start(), env.goal(), q, spec.fixed_episodes);
  }
  auto f = open_out(csv);
  write_reward_csv(f, tr.trace, static_cast<std::size_t>(tr.complexity.window));
  std::cout << "episodes=" << tr.episodes_used << " converged=" << (tr.converged ? "true" : "false")
            << " window=" << tr.complexity.window << '\n';
  return tr.status == TrainStatus::UnreachableGoal ? kFailed : kOk;
}

int cmd_gen_fixtures(const std::string& out, bool json) {
  for (const char* name : {"indoor", "outdoor", "simple", "complex"}) {
    const fs::path p = fs::path(out) / (std::string(name) + (json ? ".json" : ".txt"));
    fs::create_directories(p.parent_path());
    save_environment(fixtures::by_name(name), p);
    std::cout << p.string() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid path planning with dynamic-iteration Q-learning"};
  app.require_subcommand(1);
  Common common;

  std::string env = "indoor", planner = "qlearn-dyn", planners = "astar,rrt,pso,qlearn-dyn", out = "bench_out";
  std::string svg, csv, log, summary, scan_dump, mode = "dyn";
  int reps = 100;
  unsigned workers = 0;
  bool serial = false, no_timing = false, json = false;

  auto* bench = app.add_subcommand("bench", "repeated missions per planner and environment");
  bench->add_option("--env", env, "comma-separated bundled names or map files");
  bench->add_option("--planners", planners, "astar,rrt,pso,qlearn-dyn,qlearn-fixed:N");
  bench->add_option("--reps", reps);
  bench->add_option("--out", out, "report directory");
  bench->add_option("--workers", workers, "parallel repetitions (0: all cores)");
  bench->add_flag("--serial-timing", serial, "run repetitions on one thread");
  bench->add_flag("--no-timing", no_timing, "leave host-dependent timing columns empty");
  add_common(bench, common);

  auto* plan_cmd = app.add_subcommand("plan", "offline plan on the fully known map");
  plan_cmd->add_option("--env", env);
  plan_cmd->add_option("--planner", planner);
  plan_cmd->add_option("--svg", svg);
  plan_cmd->add_option("--csv", csv, "smoothed trajectory x,y,heading");
  add_common(plan_cmd, common);

  auto* mission = app.add_subcommand("mission", "online mission on an unknown map");
  mission->add_option("--env", env);
  mission->add_option("--planner", planner);
  mission->add_option("--log", log, "per-tick JSON lines");
  mission->add_option("--summary", summary, "summary JSON");
  mission->add_option("--scan-dump", scan_dump, "per-tick scans as JSON lines");
  mission->add_flag("--no-timing", no_timing);
  add_common(mission, common);

  auto* curve = app.add_subcommand("reward-curve", "Q-learning reward trace on the fully known map");
  curve->add_option("--env", env);
  curve->add_option("--mode", mode, "dyn or fixed:N");
  curve->add_option("--csv", csv)->required();
  add_common(curve, common);

  auto* gen = app.add_subcommand("gen-fixtures", "write the bundled maps");
  gen->add_option("--out", out);
  gen->add_flag("--json", json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*bench) return cmd_bench(env, planners, reps, out, serial, no_timing, workers, common);
    if (*plan_cmd) return cmd_plan(env, planner, svg, csv, common);
    if (*mission) return cmd_mission(env, planner, log, summary, scan_dump, no_timing, common);
    if (*curve) return cmd_reward_curve(env, mode, csv, common);
    if (*gen) return cmd_gen_fixtures(gen->count("--out") ? out : "data", json);
  } catch (const ConfigError& e) {
    std::cerr << "qplan: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qplan: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "qplan: " << e.what() << '\n';
    return kFailed;
  }
  return kOk;
}
