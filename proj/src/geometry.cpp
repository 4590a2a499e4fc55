#include "fvdd/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace fvdd {

namespace {

int orientation(const Point& a, const Point& b, const Point& c) {
  const double v = cross(b - a, c - a);
  const double scale = (b - a).norm() * (c - a).norm();
  if (std::abs(v) <= 1e-14 * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace

double signed_area(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice += cross(polygon[i], polygon[(i + 1) % n]);
  return 0.5 * twice;
}

Point centroid(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  Point mean = Point::Zero();
  for (const auto& p : polygon) mean += p;
  mean /= static_cast<double>(std::max<std::size_t>(n, 1));
  // Shift to the vertex mean to keep the accumulated cross products small.
  double twice_area = 0.0;
  Point acc = Point::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = polygon[i] - mean;
    const Point b = polygon[(i + 1) % n] - mean;
    const double w = cross(a, b);
    twice_area += w;
    acc += w * (a + b);
  }
  if (std::abs(twice_area) < 1e-300) return mean;
  return mean + acc / (3.0 * twice_area);
}

bool is_simple(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (polygon[i] == polygon[j]) return false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool is_star_shaped_wrt(std::span<const Point> polygon, const Point& p) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    const double len = (b - a).norm();
    if (cross(b - a, p - a) <= 1e-14 * len * len) return false;
  }
  return true;
}

Polygon clip_to_box(std::span<const Point> polygon, const Box& box) {
  Polygon out(polygon.begin(), polygon.end());
  // Each half-plane is {p : sign * (p[axis] - bound) <= 0}.
  const struct {
    int axis;
    double bound;
    double sign;
  } planes[4] = {{0, box.lower.x(), -1.0}, {0, box.upper.x(), 1.0}, {1, box.lower.y(), -1.0}, {1, box.upper.y(), 1.0}};
  for (const auto& plane : planes) {
    if (out.empty()) break;
    Polygon next;
    const std::size_t n = out.size();
    auto dist = [&](const Point& q) { return plane.sign * (q[plane.axis] - plane.bound); };
    for (std::size_t i = 0; i < n; ++i) {
      const Point& cur = out[i];
      const Point& nxt = out[(i + 1) % n];
      const double dc = dist(cur);
      const double dn = dist(nxt);
      if (dc <= 0) next.push_back(cur);
      if ((dc < 0 && dn > 0) || (dc > 0 && dn < 0)) {
        const double t = dc / (dc - dn);
        Point q = cur + t * (nxt - cur);
        q[plane.axis] = plane.bound;
        next.push_back(q);
      }
    }
    out = std::move(next);
  }
  return out;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace fvdd
