#pragma once

// Small planar geometry helpers shared by extraction and measures.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "nodal/field_sampler.hpp"

namespace nodal::detail {

inline double cross(Vec2 o, Vec2 a, Vec2 b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

/// Andrew's monotone chain; counter-clockwise, no repeated endpoint.
inline std::vector<Vec2> convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Vec2> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Diameter of a convex polygon by rotating calipers.
inline double hull_diameter(std::span<const Vec2> hull) {
  const std::size_t n = hull.size();
  if (n == 0) return 0.0;
  if (n == 1) return 0.0;
  if (n == 2) return distance(hull[0], hull[1]);
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ni = (i + 1) % n;
    while (std::abs(cross(hull[i], hull[ni], hull[(j + 1) % n])) >
           std::abs(cross(hull[i], hull[ni], hull[j]))) {
      j = (j + 1) % n;
    }
    best = std::max({best, distance(hull[i], hull[j]), distance(hull[ni], hull[j])});
  }
  return best;
}

/// Distance from point p to segment ab.
inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
}

/// Minimum distance from p to a polyline (closed when `closed`).
inline double polyline_distance(Vec2 p, std::span<const Vec2> line, bool closed) {
  if (line.empty()) return INFINITY;
  if (line.size() == 1) return distance(p, line[0]);
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) best = std::min(best, segment_distance(p, line[i], line[i + 1]));
  if (closed) best = std::min(best, segment_distance(p, line.back(), line.front()));
  return best;
}

/// Largest distance from p to any hull vertex (= to any point of the curve).
inline double farthest_distance(Vec2 p, std::span<const Vec2> hull) {
  double best = 0.0;
  for (const auto& q : hull) best = std::max(best, distance(p, q));
  return best;
}

}  // namespace nodal::detail
