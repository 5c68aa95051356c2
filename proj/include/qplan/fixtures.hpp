#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "qplan/gridworld.hpp"
#include "qplan/types.hpp"

// Procedurally generated stand-ins for the evaluation environments. Every generator
// is seeded and deterministic; the shipped data/ files are their output.
namespace qplan::fixtures {

struct Rect {
  int x0, y0, x1, y1;  // inclusive corners
};

namespace detail {

inline bool reachable(const TruthEnvironment& env, Cell from, Cell to) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(env.width()) * env.height(), 0);
  std::deque<Cell> open{from};
  seen[env.index(from)] = 1;
  while (!open.empty()) {
    const Cell c = open.front();
    open.pop_front();
    if (c == to) return true;
    for (Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}}) {
      if (!env.in_bounds(n) || env.occupied(n) || seen[env.index(n)]) continue;
      seen[env.index(n)] = 1;
      open.push_back(n);
    }
  }
  return false;
}

// True when `r` grown by `gap` cells intersects an occupied cell or a keep-out point.
inline bool conflicts(const TruthEnvironment& env, Rect r, int gap, const std::vector<Cell>& keep_out, int keep_gap) {
  if (r.x0 < 0 || r.y0 < 0 || r.x1 >= env.width() || r.y1 >= env.height()) return true;
  for (int y = r.y0 - gap; y <= r.y1 + gap; ++y)
    for (int x = r.x0 - gap; x <= r.x1 + gap; ++x)
      if (env.occupied({x, y})) return true;
  for (Cell k : keep_out)
    if (k.x >= r.x0 - keep_gap && k.x <= r.x1 + keep_gap && k.y >= r.y0 - keep_gap && k.y <= r.y1 + keep_gap)
      return true;
  return false;
}

inline void fill(TruthEnvironment& env, Rect r) {
  for (int y = r.y0; y <= r.y1; ++y)
    for (int x = r.x0; x <= r.x1; ++x) env.set_occupied({x, y});
}

// Places up to `count` rectangles drawn by `draw`, skipping conflicting ones.
template <typename Draw>
void scatter(TruthEnvironment& env, Rng& rng, int count, int attempts, int gap, int keep_gap, Draw draw) {
  const std::vector<Cell> keep_out{env.start(), env.goal()};
  for (int placed = 0, tries = 0; placed < count && tries < attempts; ++tries) {
    const Rect r = draw(rng);
    if (conflicts(env, r, gap, keep_out, keep_gap)) continue;
    fill(env, r);
    if (!reachable(env, env.start(), env.goal())) {
      for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) env.set_occupied({x, y}, false);
      continue;
    }
    ++placed;
  }
}

inline int pick(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

}  // namespace detail

// 30 x 30 room with wall segments and cardboard boxes.
inline TruthEnvironment indoor(std::uint64_t seed = 7) {
  TruthEnvironment env(30, 30, {2, 2}, {25, 14}, "indoor");
  Rng rng(seed);
  detail::scatter(env, rng, 6, 4000, 3, 3, [](Rng& g) {
    const int len = detail::pick(g, 6, 12);
    if (g.below(2) == 0) {
      const int x = detail::pick(g, 0, 29 - len), y = detail::pick(g, 0, 29);
      return Rect{x, y, x + len - 1, y};
    }
    const int x = detail::pick(g, 0, 29), y = detail::pick(g, 0, 29 - len);
    return Rect{x, y, x, y + len - 1};
  });
  detail::scatter(env, rng, 10, 4000, 3, 3, [](Rng& g) {
    const int w = detail::pick(g, 2, 3), h = detail::pick(g, 2, 3);
    const int x = detail::pick(g, 0, 30 - w), y = detail::pick(g, 0, 30 - h);
    return Rect{x, y, x + w - 1, y + h - 1};
  });
  env.validate();
  return env;
}

// 40 x 40 forest of one- and two-cell trees.
inline TruthEnvironment outdoor(std::uint64_t seed = 11) {
  TruthEnvironment env(40, 40, {2, 2}, {36, 32}, "outdoor");
  Rng rng(seed);
  detail::scatter(env, rng, 70, 20000, 2, 2, [](Rng& g) {
    const int w = detail::pick(g, 1, 2), h = detail::pick(g, 1, 2);
    const int x = detail::pick(g, 0, 40 - w), y = detail::pick(g, 0, 40 - h);
    return Rect{x, y, x + w - 1, y + h - 1};
  });
  env.validate();
  return env;
}

// 18 x 15 room with a few simple obstacles.
inline TruthEnvironment simple() {
  TruthEnvironment env(18, 15, {1, 1}, {16, 13}, "simple");
  detail::fill(env, {5, 0, 6, 8});
  detail::fill(env, {11, 6, 12, 14});
  detail::fill(env, {14, 2, 16, 3});
  env.validate();
  return env;
}

// 100 x 100 serpentine layout: long walls with alternating gaps plus scattered
// blocks inside the lanes.
inline TruthEnvironment complex(std::uint64_t seed = 3) {
  TruthEnvironment env(100, 100, {2, 2}, {97, 97}, "complex");
  for (int k = 0; k < 8; ++k) {
    const int y = 11 + 11 * k;
    if (k % 2 == 0) detail::fill(env, {0, y, 91, y});
    else detail::fill(env, {8, y, 99, y});
  }
  Rng rng(seed);
  detail::scatter(env, rng, 60, 20000, 2, 3, [](Rng& g) {
    const int w = detail::pick(g, 2, 4), h = detail::pick(g, 2, 3);
    const int x = detail::pick(g, 0, 100 - w), y = detail::pick(g, 0, 100 - h);
    return Rect{x, y, x + w - 1, y + h - 1};
  });
  env.validate();
  return env;
}

// Named bundled environment, or throws std::invalid_argument.
inline TruthEnvironment by_name(const std::string& name) {
  if (name == "indoor") return indoor();
  if (name == "outdoor") return outdoor();
  if (name == "simple") return simple();
  if (name == "complex") return complex();
  throw std::invalid_argument("unknown bundled environment '" + name + "'");
}

}  // namespace qplan::fixtures
