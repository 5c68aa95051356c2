#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace qplan {

// Grid cell; the cell size is 1 m and cell (x, y) covers [x-0.5, x+0.5] x [y-0.5, y+0.5].
struct Cell {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(const Cell&, const Cell&) = default;
  // Row-major order (y first) so that sorted cell sets read like the map.
  friend constexpr auto operator<=>(const Cell& a, const Cell& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

// Continuous position in meters, same frame as cell centers.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const Point&, const Point&) = default;
};

inline Point center(Cell c) { return {static_cast<double>(c.x), static_cast<double>(c.y)}; }

// Cell containing p (half-open upward at boundaries).
inline Cell cell_of(Point p) {
  return {static_cast<int>(std::floor(p.x + 0.5)), static_cast<int>(std::floor(p.y + 0.5))};
}

inline double euclidean(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double euclidean(Cell a, Cell b) { return euclidean(center(a), center(b)); }

inline int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

template <typename Node>
double polyline_length(const std::vector<Node>& nodes) {
  double len = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) len += euclidean(nodes[i - 1], nodes[i]);
  return len;
}

using DiscretePath = std::vector<Cell>;
using Polyline = std::vector<Point>;

// Seeded random stream. Distributions are written out here rather than taken from
// <random> so that traces are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection keeps the draw unbiased for any n.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qplan

template <>
struct std::hash<qplan::Cell> {
  std::size_t operator()(const qplan::Cell& c) const noexcept {
    return std::hash<std::int64_t>{}((static_cast<std::int64_t>(c.x) << 32) ^ static_cast<std::uint32_t>(c.y));
  }
};
