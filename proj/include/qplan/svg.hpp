#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "qplan/gridworld.hpp"
#include "qplan/types.hpp"

namespace qplan {

// Map with obstacles, the raw path (grey) and the smoothed path (blue). y grows
// upward, so rows are flipped. Exactly one <polyline> per non-empty path.
inline std::string render_svg(const TruthEnvironment& env, const std::vector<Point>& raw,
                              const std::vector<Point>& smoothed, int scale = 16) {
  std::ostringstream out;
  const int w = env.width() * scale, h = env.height() * scale;
  auto px = [&](double x) { return (x + 0.5) * scale; };
  auto py = [&](double y) { return h - (y + 0.5) * scale; };
  char buf[96];
  auto pts = [&](const std::vector<Point>& path) {
    std::string s;
    for (const Point& p : path) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(p.x), py(p.y));
      s += buf;
    }
    if (!s.empty()) s.pop_back();
    return s;
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  out << "<g fill=\"black\">\n";
  for (Cell c : env.occupied_cells())
    out << "<rect x=\"" << c.x * scale << "\" y=\"" << h - (c.y + 1) * scale << "\" width=\"" << scale << "\" height=\""
        << scale << "\"/>\n";
  out << "</g>\n";
  if (!raw.empty())
    out << "<path class=\"raw\" fill=\"none\" stroke=\"#999\" stroke-width=\"2\" d=\"M " << pts(raw) << "\"/>\n";
  if (!smoothed.empty())
    out << "<polyline class=\"smoothed\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" << pts(smoothed)
        << "\"/>\n";
  const Cell s = env.start(), g = env.goal();
  out << "<circle cx=\"" << px(s.x) << "\" cy=\"" << py(s.y) << "\" r=\"" << scale / 3 << "\" fill=\"green\"/>\n";
  out << "<circle cx=\"" << px(g.x) << "\" cy=\"" << py(g.y) << "\" r=\"" << scale / 3 << "\" fill=\"red\"/>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace qplan
