#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "qplan/gridworld.hpp"
#include "qplan/types.hpp"

namespace qplan {

class DuplicateKnot : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Greedy shortcutting: from each kept node jump to the farthest later node that is
// visible, until the last node. Never lengthens the polyline.
template <typename Node>
std::vector<Node> refine(const std::vector<Node>& path, const CostMap& cost) {
  if (path.size() <= 2) return path;
  std::vector<Node> out{path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = path.size() - 1; j > i + 1; --j)
      if (line_of_sight(cost, path[i], path[j])) {
        next = j;
        break;
      }
    out.push_back(path[next]);
    i = next;
  }
  return out;
}

// Natural cubic spline of one coordinate over strictly increasing parameters.
class NaturalSpline {
 public:
  struct Segment {
    double a, b, c, d;  // value = a + b u + c u^2 + d u^3 with u = t - t_i
  };

  NaturalSpline() = default;
  NaturalSpline(std::vector<double> t, const std::vector<double>& y) : t_(std::move(t)) {
    const std::size_t n = t_.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("spline needs >= 2 matching knots");
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = t_[i + 1] - t_[i];
      if (!(h[i] > 0.0)) throw DuplicateKnot("spline parameters must be strictly increasing");
    }
    // Thomas solve for interior second derivatives; the ends are zero.
    std::vector<double> m(n, 0.0);
    if (n > 2) {
      const std::size_t k = n - 2;
      std::vector<double> diag(k), upper(k), rhs(k);
      for (std::size_t i = 0; i < k; ++i) {
        diag[i] = 2.0 * (h[i] + h[i + 1]);
        upper[i] = h[i + 1];
        rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
      }
      for (std::size_t i = 1; i < k; ++i) {
        const double f = h[i] / diag[i - 1];  // sub-diagonal entry is h[i]
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
      }
      m[k] = rhs[k - 1] / diag[k - 1];
      for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
    seg_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      seg_[i].a = y[i];
      seg_[i].b = (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
      seg_[i].c = m[i] / 2.0;
      seg_[i].d = (m[i + 1] - m[i]) / (6.0 * h[i]);
    }
  }

  const std::vector<double>& knots() const noexcept { return t_; }
  const std::vector<Segment>& segments() const noexcept { return seg_; }

  // Segment index for t; knots belong to the segment they start, the last knot to the last segment.
  std::size_t locate(double t) const {
    std::size_t i = 0;
    while (i + 2 < t_.size() && t >= t_[i + 1]) ++i;
    return i;
  }

  double value(std::size_t i, double t) const {
    const Segment& s = seg_[i];
    const double u = t - t_[i];
    return s.a + u * (s.b + u * (s.c + u * s.d));
  }
  double derivative(std::size_t i, double t) const {
    const Segment& s = seg_[i];
    const double u = t - t_[i];
    return s.b + u * (2.0 * s.c + 3.0 * u * s.d);
  }
  double second_derivative(std::size_t i, double t) const {
    const Segment& s = seg_[i];
    return 2.0 * s.c + 6.0 * s.d * (t - t_[i]);
  }

  double operator()(double t) const { return value(locate(t), t); }

 private:
  std::vector<double> t_;
  std::vector<Segment> seg_;
};

// Chord-length parameterized planar spline.
class Spline2D {
 public:
  Spline2D() = default;
  explicit Spline2D(const std::vector<Point>& knots) {
    if (knots.size() < 2) throw std::invalid_argument("spline needs at least two knots");
    std::vector<double> t{0.0}, xs{knots[0].x}, ys{knots[0].y};
    for (std::size_t i = 1; i < knots.size(); ++i) {
      const double d = euclidean(knots[i - 1], knots[i]);
      if (d == 0.0) throw DuplicateKnot("consecutive knots coincide");
      t.push_back(t.back() + d);
      xs.push_back(knots[i].x);
      ys.push_back(knots[i].y);
    }
    x_ = NaturalSpline(t, xs);
    y_ = NaturalSpline(std::move(t), ys);
  }

  const NaturalSpline& x() const noexcept { return x_; }
  const NaturalSpline& y() const noexcept { return y_; }
  const std::vector<double>& params() const noexcept { return x_.knots(); }
  std::size_t segment_count() const noexcept { return x_.segments().size(); }

  Point at(std::size_t seg, double t) const { return {x_.value(seg, t), y_.value(seg, t)}; }
  Point tangent(std::size_t seg, double t) const { return {x_.derivative(seg, t), y_.derivative(seg, t)}; }

 private:
  NaturalSpline x_, y_;
};

struct TrajectorySample {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad
};

struct SmoothTrajectory {
  std::vector<TrajectorySample> samples;
  std::vector<Point> knots;
  int samples_per_segment = 10;
  // Parameter and segment of each sample; absent for polyline fallbacks.
  std::optional<Spline2D> spline;
  std::vector<double> sample_params;
  std::vector<std::size_t> sample_segments;

  std::vector<Point> points() const {
    std::vector<Point> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.x, s.y});
    return out;
  }
  double length() const { return polyline_length(points()); }
};

inline SmoothTrajectory cubic_spline(const std::vector<Point>& knots, int samples_per_segment = 10) {
  if (samples_per_segment < 1) throw std::invalid_argument("samples_per_segment must be positive");
  SmoothTrajectory traj;
  traj.knots = knots;
  traj.samples_per_segment = samples_per_segment;
  traj.spline.emplace(knots);
  const Spline2D& sp = *traj.spline;
  const auto& t = sp.params();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = t[i + 1] - t[i];
    for (int k = 0; k < samples_per_segment; ++k) {
      const double ti = t[i] + h * k / samples_per_segment;
      const Point p = sp.at(i, ti);
      traj.samples.push_back({p.x, p.y, 0.0});
      traj.sample_params.push_back(ti);
      traj.sample_segments.push_back(i);
    }
  }
  const std::size_t last = sp.segment_count() - 1;
  const Point end = sp.at(last, t.back());
  traj.samples.push_back({end.x, end.y, 0.0});
  traj.sample_params.push_back(t.back());
  traj.sample_segments.push_back(last);
  return traj;
}

// Straight-segment sampling of a polyline, used when a spline cannot be made collision-free.
inline SmoothTrajectory polyline_trajectory(const std::vector<Point>& knots, int samples_per_segment = 10) {
  SmoothTrajectory traj;
  traj.knots = knots;
  traj.samples_per_segment = samples_per_segment;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    for (int k = 0; k < samples_per_segment; ++k) {
      const double f = static_cast<double>(k) / samples_per_segment;
      traj.samples.push_back({knots[i].x + f * (knots[i + 1].x - knots[i].x), knots[i].y + f * (knots[i + 1].y - knots[i].y), 0.0});
    }
  if (!knots.empty()) traj.samples.push_back({knots.back().x, knots.back().y, 0.0});
  return traj;
}

// Heading from the spline's analytic first derivative; the final sample takes the
// incoming segment's end tangent. Polyline trajectories use segment directions.
inline SmoothTrajectory headings(SmoothTrajectory traj) {
  if (traj.samples.size() < 2) throw std::invalid_argument("headings need at least two samples");
  if (traj.spline) {
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      const Point d = traj.spline->tangent(traj.sample_segments[i], traj.sample_params[i]);
      traj.samples[i].heading = std::atan2(d.y, d.x);
    }
  } else {
    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
      auto& s = traj.samples[i];
      const auto& n = traj.samples[i + 1];
      s.heading = std::atan2(n.y - s.y, n.x - s.x);
    }
    traj.samples.back().heading = traj.samples[traj.samples.size() - 2].heading;
  }
  return traj;
}

struct SmoothingConfig {
  int samples_per_segment = 10;
  int max_reknot_rounds = 5;
};

struct SmoothResult {
  SmoothTrajectory trajectory;
  std::vector<Point> refined;
  bool fallback = false;
  int reknot_rounds = 0;
};

// Knot segments whose sampled spline polyline crosses a blocked cell.
inline std::vector<std::size_t> colliding_knot_segments(const SmoothTrajectory& traj, const CostMap& cost) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
    const Point a{traj.samples[i].x, traj.samples[i].y}, b{traj.samples[i + 1].x, traj.samples[i + 1].y};
    if (line_of_sight(cost, a, b)) continue;
    const std::size_t seg = traj.sample_segments.empty() ? i / traj.samples_per_segment : traj.sample_segments[i];
    if (bad.empty() || bad.back() != seg) bad.push_back(seg);
  }
  return bad;
}

template <typename Node>
SmoothResult smooth_pipeline(const std::vector<Node>& path, const CostMap& cost, const SmoothingConfig& cfg = {}) {
  SmoothResult out;
  const std::vector<Node> refined = refine(path, cost);
  for (const Node& n : refined) {
    const Point p = [&] {
      if constexpr (std::is_same_v<Node, Cell>) return center(n);
      else return n;
    }();
    if (out.refined.empty() || out.refined.back() != p) out.refined.push_back(p);
  }
  if (out.refined.size() < 2) {
    out.trajectory = polyline_trajectory(out.refined, cfg.samples_per_segment);
    if (out.refined.size() == 1) out.trajectory.samples = {{out.refined[0].x, out.refined[0].y, 0.0}};
    return out;
  }
  std::vector<Point> knots = out.refined;
  for (int round = 0; round <= cfg.max_reknot_rounds; ++round) {
    SmoothTrajectory traj = cubic_spline(knots, cfg.samples_per_segment);
    const auto bad = colliding_knot_segments(traj, cost);
    if (bad.empty()) {
      out.trajectory = headings(std::move(traj));
      out.reknot_rounds = round;
      return out;
    }
    if (round == cfg.max_reknot_rounds) break;
    for (auto it = bad.rbegin(); it != bad.rend(); ++it) {
      const Point a = knots[*it], b = knots[*it + 1];
      knots.insert(knots.begin() + static_cast<std::ptrdiff_t>(*it) + 1, Point{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0});
    }
  }
  out.fallback = true;
  out.reknot_rounds = cfg.max_reknot_rounds;
  out.trajectory = headings(polyline_trajectory(out.refined, cfg.samples_per_segment));
  return out;
}

inline void write_trajectory_csv(std::ostream& out, const SmoothTrajectory& traj) {
  out << "x,y,heading\n";
  char buf[96];
  for (const auto& s : traj.samples) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", s.x, s.y, s.heading);
    out << buf;
  }
}

// --- Spline-only planning --------------------------------------------------------

struct SplineOnlyResult {
  bool success = false;
  SmoothTrajectory trajectory;
  long long candidates_tried = 0;
  double planning_time = 0.0;
};

// Three-knot spline start -> perturbed midpoint -> goal; searches midpoint offsets on
// the unit lattice across the whole map and accepts the first collision-free sampling,
// trying offsets in order of increasing distance from the straight-line midpoint.
inline SplineOnlyResult spline_only_plan(const CostMap& cost, Cell start, Cell goal, int samples_per_segment = 50) {
  const auto t0 = std::chrono::steady_clock::now();
  SplineOnlyResult res;
  const Point s = center(start), g = center(goal), mid{(s.x + g.x) / 2.0, (s.y + g.y) / 2.0};
  std::vector<std::pair<double, Point>> candidates;
  for (int y = 0; y < cost.height(); ++y)
    for (int x = 0; x < cost.width(); ++x) {
      const Point m{static_cast<double>(x), static_cast<double>(y)};
      if (m == s || m == g) continue;
      candidates.emplace_back(euclidean(m, mid), m);
    }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [dist, m] : candidates) {
    ++res.candidates_tried;
    if (cost.blocked(cell_of(m))) continue;
    SmoothTrajectory traj = cubic_spline({s, m, g}, samples_per_segment);
    if (!colliding_knot_segments(traj, cost).empty()) continue;
    res.success = true;
    res.trajectory = headings(std::move(traj));
    break;
  }
  res.planning_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace qplan
