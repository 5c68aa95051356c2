#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qplan/types.hpp"

namespace qplan {

class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ground-truth world seen by the simulated sensor.
class TruthEnvironment {
 public:
  TruthEnvironment() = default;
  TruthEnvironment(int width, int height, Cell start, Cell goal, std::string name = {})
      : width_(width), height_(height), occupied_(cell_count(width, height), 0), start_(start), goal_(goal),
        name_(std::move(name)) {
    if (width <= 0 || height <= 0) throw EnvironmentError("environment dimensions must be positive");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Cell start() const noexcept { return start_; }
  Cell goal() const noexcept { return goal_; }
  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  void set_start(Cell c) { start_ = c; }
  void set_goal(Cell c) { goal_ = c; }

  bool in_bounds(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool occupied(Cell c) const { return in_bounds(c) && occupied_[index(c)] != 0; }

  void set_occupied(Cell c, bool value = true) {
    if (!in_bounds(c)) throw EnvironmentError("obstacle out of bounds");
    occupied_[index(c)] = value ? 1 : 0;
  }

  std::vector<Cell> occupied_cells() const {
    std::vector<Cell> out;
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x)
        if (occupied_[index({x, y})]) out.push_back({x, y});
    return out;
  }

  // Throws EnvironmentError when start/goal are out of bounds or on an obstacle.
  void validate() const {
    if (!in_bounds(start_)) throw EnvironmentError("start out of bounds");
    if (!in_bounds(goal_)) throw EnvironmentError("goal out of bounds");
    if (occupied(start_)) throw EnvironmentError("start lies on an obstacle");
    if (occupied(goal_)) throw EnvironmentError("goal lies on an obstacle");
  }

  std::size_t index(Cell c) const noexcept { return static_cast<std::size_t>(c.y) * width_ + c.x; }

 private:
  static std::size_t cell_count(int w, int h) {
    return w > 0 && h > 0 ? static_cast<std::size_t>(w) * static_cast<std::size_t>(h) : 0;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> occupied_;
  Cell start_{};
  Cell goal_{};
  std::string name_;
};

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

// The agent's belief about the world.
class KnownMap {
 public:
  KnownMap() = default;
  KnownMap(int width, int height)
      : width_(width), height_(height),
        state_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), CellState::Unknown) {}

  static KnownMap fully_known(const TruthEnvironment& truth) {
    KnownMap m(truth.width(), truth.height());
    for (int y = 0; y < truth.height(); ++y)
      for (int x = 0; x < truth.width(); ++x)
        m.set({x, y}, truth.occupied({x, y}) ? CellState::Occupied : CellState::Free);
    return m;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool in_bounds(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  CellState at(Cell c) const { return state_[index(c)]; }
  void set(Cell c, CellState s) { state_[index(c)] = s; }

  std::vector<Cell> cells_in(CellState s) const {
    std::vector<Cell> out;
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x)
        if (state_[index({x, y})] == s) out.push_back({x, y});
    return out;
  }

  std::size_t count(CellState s) const { return static_cast<std::size_t>(std::count(state_.begin(), state_.end(), s)); }

  std::size_t index(Cell c) const noexcept { return static_cast<std::size_t>(c.y) * width_ + c.x; }

  friend bool operator==(const KnownMap&, const KnownMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<CellState> state_;
};

struct CostMapConfig {
  double robot_radius = 0.4;  // m
  double risk_radius = 1.0;   // m
  double risk_penalty = 2.0;  // extra step cost inside the risk zone
};

// Traversal-cost layer over a KnownMap. Unknown cells cost as free.
class CostMap {
 public:
  CostMap() = default;

  int width() const noexcept { return known_.width(); }
  int height() const noexcept { return known_.height(); }
  const KnownMap& known() const noexcept { return known_; }
  const CostMapConfig& config() const noexcept { return cfg_; }
  double risk_penalty() const noexcept { return cfg_.risk_penalty; }

  bool in_bounds(Cell c) const noexcept { return known_.in_bounds(c); }
  // Out-of-bounds cells count as blocked.
  bool blocked(Cell c) const { return !in_bounds(c) || blocked_[known_.index(c)] != 0; }
  bool risk(Cell c) const { return in_bounds(c) && risk_[known_.index(c)] != 0; }

  double step_cost(Cell c) const {
    if (blocked(c)) return std::numeric_limits<double>::infinity();
    return risk(c) ? 1.0 + cfg_.risk_penalty : 1.0;
  }

  std::size_t free_cell_count() const {
    return static_cast<std::size_t>(std::count(blocked_.begin(), blocked_.end(), std::uint8_t{0}));
  }

  std::vector<Cell> blocked_cells() const { return collect(blocked_); }
  std::vector<Cell> risk_cells() const { return collect(risk_); }

  // Same layer with a different risk penalty.
  CostMap with_risk_penalty(double penalty) const {
    CostMap copy = *this;
    copy.cfg_.risk_penalty = penalty;
    return copy;
  }

 private:
  friend CostMap build_costmap(const KnownMap& map, const CostMapConfig& cfg);

  std::vector<Cell> collect(const std::vector<std::uint8_t>& layer) const {
    std::vector<Cell> out;
    for (int y = 0; y < height(); ++y)
      for (int x = 0; x < width(); ++x)
        if (layer[known_.index({x, y})]) out.push_back({x, y});
    return out;
  }

  KnownMap known_;
  CostMapConfig cfg_;
  std::vector<std::uint8_t> blocked_;
  std::vector<std::uint8_t> risk_;
};

// Number of cells the robot body reaches beyond its own cell when centered in it.
inline int inflation_cells(double robot_radius) {
  return std::max(0, static_cast<int>(std::ceil(robot_radius - 0.5 - 1e-9)));
}

inline int risk_cells_radius(double risk_radius) {
  return std::max(0, static_cast<int>(std::floor(risk_radius + 1e-9)));
}

namespace detail {

// Chebyshev dilation of a binary layer by `r` cells.
inline std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& src, int w, int h, int r) {
  if (r <= 0) return src;
  std::vector<std::uint8_t> rows(src.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!src[static_cast<std::size_t>(y) * w + x]) continue;
      for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) rows[static_cast<std::size_t>(y) * w + xx] = 1;
    }
  std::vector<std::uint8_t> out(src.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!rows[static_cast<std::size_t>(y) * w + x]) continue;
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) out[static_cast<std::size_t>(yy) * w + x] = 1;
    }
  return out;
}

}  // namespace detail

inline CostMap build_costmap(const KnownMap& map, const CostMapConfig& cfg = {}) {
  if (cfg.robot_radius < 0 || cfg.risk_radius < 0) throw std::invalid_argument("radii must be nonnegative");
  CostMap cost;
  cost.known_ = map;
  cost.cfg_ = cfg;
  const int w = map.width(), h = map.height();
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (map.at({x, y}) == CellState::Occupied) occ[map.index({x, y})] = 1;
  cost.blocked_ = detail::dilate(occ, w, h, inflation_cells(cfg.robot_radius));
  cost.risk_ = detail::dilate(cost.blocked_, w, h, risk_cells_radius(cfg.risk_radius));
  for (std::size_t i = 0; i < cost.risk_.size(); ++i)
    if (cost.blocked_[i]) cost.risk_[i] = 0;
  return cost;
}

inline CostMap build_costmap(const TruthEnvironment& truth, const CostMapConfig& cfg = {}) {
  return build_costmap(KnownMap::fully_known(truth), cfg);
}

// Cells whose interior the segment between two cell centers crosses, in traversal
// order and including both endpoints. A segment passing exactly through a lattice
// corner goes straight to the diagonal cell.
inline std::vector<Cell> supercover(Cell a, Cell b) {
  std::vector<Cell> out{a};
  const int nx = std::abs(b.x - a.x), ny = std::abs(b.y - a.y);
  const int sx = b.x > a.x ? 1 : -1, sy = b.y > a.y ? 1 : -1;
  Cell c = a;
  for (int ix = 0, iy = 0; ix < nx || iy < ny;) {
    const long long lhs = static_cast<long long>(1 + 2 * ix) * ny;
    const long long rhs = static_cast<long long>(1 + 2 * iy) * nx;
    if (lhs == rhs) {
      c.x += sx, c.y += sy, ++ix, ++iy;
    } else if (lhs < rhs) {
      c.x += sx, ++ix;
    } else {
      c.y += sy, ++iy;
    }
    out.push_back(c);
  }
  return out;
}

// Cells touched by an arbitrary segment. Conservative: near-corner crossings that
// are not exact include both side cells, and a segment lying on a grid line
// includes the cells on both sides of it.
inline std::vector<Cell> supercover(Point p0, Point p1) {
  std::vector<Cell> out;
  const Cell first = cell_of(p0), last = cell_of(p1);
  const double dx = p1.x - p0.x, dy = p1.y - p0.y;

  auto on_grid_line = [](double v) { return std::abs(v - std::floor(v) - 0.5) == 0.0; };
  if (dy == 0.0 && on_grid_line(p0.y)) {
    const Cell lo = cell_of({p0.x, p0.y - 0.25}), hi = cell_of({p0.x, p0.y + 0.25});
    const int step = last.x >= first.x ? 1 : -1;
    for (int x = first.x;; x += step) {
      out.push_back({x, lo.y});
      out.push_back({x, hi.y});
      if (x == last.x) break;
    }
    return out;
  }
  if (dx == 0.0 && on_grid_line(p0.x)) {
    const Cell lo = cell_of({p0.x - 0.25, p0.y}), hi = cell_of({p0.x + 0.25, p0.y});
    const int step = last.y >= first.y ? 1 : -1;
    for (int y = first.y;; y += step) {
      out.push_back({lo.x, y});
      out.push_back({hi.x, y});
      if (y == last.y) break;
    }
    return out;
  }

  const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  Cell c = first;
  out.push_back(c);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kTieEps = 1e-12;
  const std::size_t guard = static_cast<std::size_t>(std::abs(last.x - first.x) + std::abs(last.y - first.y)) + 2;
  while (c != last && out.size() <= 2 * guard) {
    const double tx = dx == 0.0 ? kInf : ((c.x + 0.5 * sx) - p0.x) / dx;
    const double ty = dy == 0.0 ? kInf : ((c.y + 0.5 * sy) - p0.y) / dy;
    if (tx == ty) {
      c.x += sx, c.y += sy;
    } else if (std::abs(tx - ty) <= kTieEps) {
      out.push_back({c.x + sx, c.y});
      out.push_back({c.x, c.y + sy});
      c.x += sx, c.y += sy;
    } else if (tx < ty) {
      c.x += sx;
    } else {
      c.y += sy;
    }
    out.push_back(c);
  }
  return out;
}

inline bool line_of_sight(const CostMap& cost, Cell a, Cell b) {
  for (Cell c : supercover(a, b))
    if (cost.blocked(c)) return false;
  return true;
}

inline bool line_of_sight(const CostMap& cost, Point a, Point b) {
  for (Cell c : supercover(a, b))
    if (cost.blocked(c)) return false;
  return true;
}

// --- Environment files -------------------------------------------------------

namespace detail {

inline TruthEnvironment parse_text_environment(std::istream& in, const std::string& origin) {
  auto fail = [&](const std::string& what) { return EnvironmentError(origin + ": " + what); };
  int w = 0, h = 0;
  std::string line;
  if (!std::getline(in, line)) throw fail("missing size line");
  {
    std::istringstream ls(line);
    if (!(ls >> w >> h) || w <= 0 || h <= 0) throw fail("bad size line '" + line + "'");
  }
  auto read_point = [&](const char* key) {
    if (!std::getline(in, line)) throw fail(std::string("missing ") + key + " line");
    std::istringstream ls(line);
    std::string tag;
    Cell c;
    if (!(ls >> tag >> c.x >> c.y) || tag != key) throw fail(std::string("bad ") + key + " line '" + line + "'");
    return c;
  };
  const Cell start = read_point("start");
  const Cell goal = read_point("goal");
  TruthEnvironment env(w, h, start, goal);
  for (int y = 0; y < h; ++y) {
    if (!std::getline(in, line)) throw fail("expected " + std::to_string(h) + " grid rows, got " + std::to_string(y));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != w)
      throw fail("row " + std::to_string(y) + " has length " + std::to_string(line.size()) + ", expected " +
                 std::to_string(w));
    for (int x = 0; x < w; ++x) {
      if (line[x] == '#') env.set_occupied({x, y});
      else if (line[x] != '.') throw fail("unexpected character '" + std::string(1, line[x]) + "' in row " + std::to_string(y));
    }
  }
  try {
    env.validate();
  } catch (const EnvironmentError& e) {
    throw fail(e.what());
  }
  return env;
}

inline TruthEnvironment parse_json_environment(std::istream& in, const std::string& origin) {
  try {
    const auto j = nlohmann::json::parse(in);
    const int w = j.at("width").get<int>(), h = j.at("height").get<int>();
    auto cell = [](const nlohmann::json& v) { return Cell{v.at(0).get<int>(), v.at(1).get<int>()}; };
    TruthEnvironment env(w, h, cell(j.at("start")), cell(j.at("goal")), j.value("name", std::string{}));
    for (const auto& o : j.value("obstacles", nlohmann::json::array())) env.set_occupied(cell(o));
    env.validate();
    return env;
  } catch (const nlohmann::json::exception& e) {
    throw EnvironmentError(origin + ": " + e.what());
  } catch (const EnvironmentError& e) {
    throw EnvironmentError(origin + ": " + e.what());
  }
}

}  // namespace detail

inline TruthEnvironment load_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open environment file " + path.string());
  TruthEnvironment env = path.extension() == ".json" ? detail::parse_json_environment(in, path.string())
                                                     : detail::parse_text_environment(in, path.string());
  env.set_name(path.stem().string());
  return env;
}

inline std::string to_text(const TruthEnvironment& env) {
  std::ostringstream out;
  out << env.width() << ' ' << env.height() << '\n';
  out << "start " << env.start().x << ' ' << env.start().y << '\n';
  out << "goal " << env.goal().x << ' ' << env.goal().y << '\n';
  for (int y = 0; y < env.height(); ++y) {
    for (int x = 0; x < env.width(); ++x) out << (env.occupied({x, y}) ? '#' : '.');
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const TruthEnvironment& env) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (Cell c : env.occupied_cells()) obstacles.push_back({c.x, c.y});
  return {{"name", env.name()},
          {"width", env.width()},
          {"height", env.height()},
          {"start", {env.start().x, env.start().y}},
          {"goal", {env.goal().x, env.goal().y}},
          {"obstacles", obstacles}};
}

inline void save_environment(const TruthEnvironment& env, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EnvironmentError("cannot write environment file " + path.string());
  if (path.extension() == ".json") out << to_json(env).dump(1) << '\n';
  else out << to_text(env);
}

}  // namespace qplan
