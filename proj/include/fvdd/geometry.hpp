#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace fvdd {

using Point = Eigen::Vector2d;
using Polygon = std::vector<Point>;

inline double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Clockwise rotation by 90 degrees: maps the direction of a CCW boundary
/// edge to its outward normal.
inline Point rotate_cw(const Point& v) { return {v.y(), -v.x()}; }
inline Point rotate_ccw(const Point& v) { return {-v.y(), v.x()}; }

/// Shoelace formula; positive for counter-clockwise vertex order.
double signed_area(std::span<const Point> polygon);

/// Area-weighted centroid. Falls back to the vertex mean for degenerate input.
Point centroid(std::span<const Point> polygon);

/// True when no two non-adjacent edges of the closed polygon intersect.
bool is_simple(std::span<const Point> polygon);

/// Strict kernel test: every edge sees `p` on its left (CCW polygon).
bool is_star_shaped_wrt(std::span<const Point> polygon, const Point& p);

struct Box {
  Point lower;
  Point upper;
  bool contains(const Point& p) const {
    return p.x() >= lower.x() && p.x() <= upper.x() && p.y() >= lower.y() && p.y() <= upper.y();
  }
};

/// Sutherland-Hodgman clip against an axis-aligned box. The subject may be
/// non-convex; the returned polygon has the correct area even if it contains
/// degenerate spikes.
Polygon clip_to_box(std::span<const Point> polygon, const Box& box);

/// Distance from `p` to the closed segment [a, b].
double point_segment_distance(const Point& p, const Point& a, const Point& b);

}  // namespace fvdd
