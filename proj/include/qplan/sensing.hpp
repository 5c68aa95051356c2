#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "qplan/gridworld.hpp"

namespace qplan {

// Simulated planar lidar.
struct SensorConfig {
  double range = 8.0;  // m
  int beam_count = 360;

  void validate() const {
    if (!(range > 0.0)) throw std::invalid_argument("sensor range must be positive");
    if (beam_count < 4) throw std::invalid_argument("sensor needs at least 4 beams");
  }
};

struct Beam {
  double angle = 0.0;
  std::optional<Cell> hit;
  std::vector<Cell> free_cells;  // in ray order, before the hit
};

struct Scan {
  Cell origin;
  std::vector<Beam> beams;
};

// Walks the ray from the origin cell center. A traversed cell is within range when
// its center is no farther than `range`; the walk stops at the first occupied cell,
// the map boundary, or the range limit.
inline Beam cast_beam(const TruthEnvironment& truth, Cell origin, double angle, double range) {
  Beam beam;
  beam.angle = angle;
  const double dx = std::cos(angle), dy = std::sin(angle);
  // Snap direction components that are zero up to rounding so axis-aligned beams stay on their row/column.
  const double ux = std::abs(dx) < 1e-12 ? 0.0 : dx;
  const double uy = std::abs(dy) < 1e-12 ? 0.0 : dy;
  const Point p0 = center(origin);
  const int sx = ux > 0 ? 1 : -1, sy = uy > 0 ? 1 : -1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kTieEps = 1e-12;

  Cell c = origin;
  auto visit = [&](Cell next) {
    // Returns false when the walk must stop.
    if (!truth.in_bounds(next) || euclidean(origin, next) > range) return false;
    if (truth.occupied(next)) {
      beam.hit = next;
      return false;
    }
    beam.free_cells.push_back(next);
    return true;
  };

  while (true) {
    const double tx = ux == 0.0 ? kInf : ((c.x + 0.5 * sx) - p0.x) / ux;
    const double ty = uy == 0.0 ? kInf : ((c.y + 0.5 * sy) - p0.y) / uy;
    if (std::min(tx, ty) > range + 1.0) break;
    if (std::abs(tx - ty) <= kTieEps) {
      c.x += sx, c.y += sy;  // corner crossing: the side cells are only touched at a point
    } else if (tx < ty) {
      c.x += sx;
    } else {
      c.y += sy;
    }
    if (!visit(c)) break;
  }
  return beam;
}

inline Scan scan(const TruthEnvironment& truth, Cell origin, const SensorConfig& cfg = {}) {
  cfg.validate();
  Scan s;
  s.origin = origin;
  s.beams.reserve(static_cast<std::size_t>(cfg.beam_count));
  for (int i = 0; i < cfg.beam_count; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / cfg.beam_count;
    s.beams.push_back(cast_beam(truth, origin, angle, cfg.range));
  }
  return s;
}

// Marks free cells Free and hits Occupied; Occupied never reverts. Returns the hits
// that were not already Occupied, without duplicates, in beam order.
inline std::vector<Cell> integrate_scan(KnownMap& map, const Scan& s) {
  if (!map.in_bounds(s.origin)) throw std::invalid_argument("scan origin outside map");
  std::vector<Cell> newly_occupied;
  for (const Beam& b : s.beams) {
    for (Cell c : b.free_cells)
      if (map.at(c) != CellState::Occupied) map.set(c, CellState::Free);
    if (b.hit && map.at(*b.hit) != CellState::Occupied) {
      map.set(*b.hit, CellState::Occupied);
      newly_occupied.push_back(*b.hit);
    }
  }
  return newly_occupied;
}

// One JSON line per scan: {"origin":[x,y],"hits":[[x,y],...]}.
inline void write_scan_line(std::ostream& out, const Scan& s) {
  nlohmann::json hits = nlohmann::json::array();
  for (const Beam& b : s.beams)
    if (b.hit) hits.push_back({b.hit->x, b.hit->y});
  out << nlohmann::json{{"origin", {s.origin.x, s.origin.y}}, {"hits", hits}}.dump() << '\n';
}

}  // namespace qplan
