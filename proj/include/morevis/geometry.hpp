#pragma once

// Convex polygon kernel: areas, centroids, clipping, hulls and distances.
// Polygons are stored counter-clockwise without a repeated closing vertex.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "morevis/error.hpp"

namespace morevis {

/// Contact / collinearity tolerance in world units.
inline constexpr double kGeomEps = 1e-9;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
/// Twice the signed area of triangle (o, a, b); positive for a left turn.
inline double orient(Point o, Point a, Point b) { return cross(a - o, b - o); }
inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct BoundingBox {
  Point min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void expand(Point p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
  }
  bool empty() const { return min.x > max.x; }
  bool overlaps(const BoundingBox& o, double eps = kGeomEps) const {
    return min.x <= o.max.x + eps && o.min.x <= max.x + eps && min.y <= o.max.y + eps &&
           o.min.y <= max.y + eps;
  }
};

/// Convex, counter-clockwise polygon. Construction does not validate; use
/// classify_polygon() on untrusted input.
struct ConvexPolygon {
  std::vector<Point> vertices;

  std::size_t size() const { return vertices.size(); }
  const Point& operator[](std::size_t i) const { return vertices[i]; }
  friend bool operator==(const ConvexPolygon&, const ConvexPolygon&) = default;
};

inline double signed_area(std::span<const Point> pts) {
  double s = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(pts[i], pts[(i + 1) % n]);
  return 0.5 * s;
}

/// Shoelace area.
inline double area(const ConvexPolygon& p) { return std::abs(signed_area(p.vertices)); }

/// Area-weighted centroid.
inline Point centroid(const ConvexPolygon& p) {
  const auto& v = p.vertices;
  const std::size_t n = v.size();
  if (n == 0) return {};
  // Shift to the first vertex to keep the accumulation well conditioned.
  const Point o = v[0];
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = v[i] - o;
    const Point b = v[(i + 1) % n] - o;
    const double c = cross(a, b);
    a2 += c;
    cx += (a.x + b.x) * c;
    cy += (a.y + b.y) * c;
  }
  if (std::abs(a2) <= std::numeric_limits<double>::min()) {
    Point m{};
    for (const auto& q : v) m = m + q;
    return (1.0 / static_cast<double>(n)) * m;
  }
  return {o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2)};
}

inline BoundingBox bounding_box(const ConvexPolygon& p) {
  BoundingBox b;
  for (const auto& v : p.vertices) b.expand(v);
  return b;
}

inline ConvexPolygon translated(const ConvexPolygon& p, Point by) {
  ConvexPolygon out = p;
  for (auto& v : out.vertices) v = v + by;
  return out;
}

/// Regular n-gon, first vertex at angle `phase`.
inline ConvexPolygon regular_polygon(Point center, double radius, int n, double phase = 0.0) {
  ConvexPolygon p;
  p.vertices.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double a = phase + 2.0 * std::numbers::pi * k / n;
    p.vertices.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return p;
}

/// Axis-aligned box as a 4-vertex CCW polygon.
inline ConvexPolygon box_polygon(double xmin, double ymin, double xmax, double ymax) {
  return {{{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}}};
}

enum class PolygonDefect { none, too_few_vertices, repeated_vertex, degenerate, winding, non_convex };

inline const char* to_string(PolygonDefect d) {
  switch (d) {
    case PolygonDefect::none: return "ok";
    case PolygonDefect::too_few_vertices: return "too-few-vertices";
    case PolygonDefect::repeated_vertex: return "repeated-vertex";
    case PolygonDefect::degenerate: return "degenerate";
    case PolygonDefect::winding: return "winding";
    case PolygonDefect::non_convex: return "non-convex";
  }
  return "unknown";
}

/// Checks vertex count, repeated vertices, positive area, convexity and CCW
/// winding. A convex polygon listed clockwise reports `winding`; anything
/// with mixed turn directions or a total turn other than one revolution
/// (self-intersecting) reports `non_convex`.
inline PolygonDefect classify_polygon(std::span<const Point> v) {
  const std::size_t n = v.size();
  if (n < 3) return PolygonDefect::too_few_vertices;
  for (std::size_t i = 0; i < n; ++i)
    if (distance(v[i], v[(i + 1) % n]) <= kGeomEps) return PolygonDefect::repeated_vertex;
  int pos = 0, neg = 0;
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = v[i];
    const Point b = v[(i + 1) % n];
    const Point c = v[(i + 2) % n];
    const Point e1 = b - a;
    const Point e2 = c - b;
    const double o = cross(e1, e2);
    const double scale = std::hypot(e1.x, e1.y) * std::hypot(e2.x, e2.y);
    if (o > kGeomEps * scale) ++pos;
    else if (o < -kGeomEps * scale) ++neg;
    turning += std::atan2(o, dot(e1, e2));
  }
  if (pos > 0 && neg > 0) return PolygonDefect::non_convex;
  if (pos == 0 && neg == 0) return PolygonDefect::degenerate;
  const double revolutions = turning / (2.0 * std::numbers::pi);
  if (std::abs(std::abs(revolutions) - 1.0) > 1e-6) return PolygonDefect::non_convex;
  if (std::abs(signed_area(v)) <= kGeomEps) return PolygonDefect::degenerate;
  return neg > 0 ? PolygonDefect::winding : PolygonDefect::none;
}

/// Andrew's monotone chain. Collinear boundary points are dropped. Throws
/// ValidationError when fewer than three non-collinear points are given.
inline ConvexPolygon convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Point a, Point b) { return distance(a, b) <= kGeomEps; }),
            pts.end());
  if (pts.size() < 3) throw ValidationError("convex hull: fewer than three distinct points");
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  auto turn_ok = [&](Point o, Point a, Point b) {
    const double scale = std::max({1.0, distance(o, a), distance(o, b)});
    return orient(o, a, b) > kGeomEps * scale;
  };
  for (const auto& p : pts) {
    while (k >= 2 && !turn_ok(h[k - 2], h[k - 1], p)) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && !turn_ok(h[k - 2], h[k - 1], pts[i])) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  if (h.size() < 3) throw ValidationError("convex hull: input points are collinear");
  return {std::move(h)};
}

/// Sutherland-Hodgman clip of `subject` against every edge of `clip`.
/// Both convex CCW; the result is convex CCW (possibly empty).
inline std::vector<Point> clip_convex(const ConvexPolygon& subject, const ConvexPolygon& clip) {
  std::vector<Point> out = subject.vertices;
  std::vector<Point> in;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Point a = clip[e];
    const Point b = clip[(e + 1) % m];
    in.swap(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point p = in[i];
      const Point q = in[(i + 1) % n];
      const double sp = orient(a, b, p);
      const double sq = orient(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

/// Area of p ∩ q; values at or below kGeomEps are reported as 0.
inline double intersection_area(const ConvexPolygon& p, const ConvexPolygon& q) {
  if (!bounding_box(p).overlaps(bounding_box(q), 0.0)) return 0.0;
  // Clip the smaller polygon against the larger one; the result is symmetric
  // up to rounding, so fix the order to make it bit-symmetric too.
  auto lex = [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); };
  const bool swap =
      p.size() > q.size() ||
      (p.size() == q.size() && std::lexicographical_compare(q.vertices.begin(), q.vertices.end(),
                                                            p.vertices.begin(), p.vertices.end(), lex));
  const auto pts = swap ? clip_convex(q, p) : clip_convex(p, q);
  if (pts.size() < 3) return 0.0;
  const double a = std::abs(signed_area(pts));
  return a <= kGeomEps ? 0.0 : a;
}

inline double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

inline bool segments_intersect(Point a, Point b, Point c, Point d) {
  const double d1 = orient(c, d, a);
  const double d2 = orient(c, d, b);
  const double d3 = orient(a, b, c);
  const double d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return point_segment_distance(a, c, d) <= kGeomEps || point_segment_distance(b, c, d) <= kGeomEps ||
         point_segment_distance(c, a, b) <= kGeomEps || point_segment_distance(d, a, b) <= kGeomEps;
}

/// True when `pt` is inside or on the boundary of convex CCW `p`.
inline bool contains(const ConvexPolygon& p, Point pt, double eps = kGeomEps) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = p[i];
    const Point b = p[(i + 1) % n];
    if (orient(a, b, pt) < -eps * std::max(1.0, distance(a, b))) return false;
  }
  return true;
}

namespace detail {

inline double point_segment_distance2(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  const Point d = p - (a + t * ab);
  return dot(d, d);
}

/// True when some edge of `p` has every vertex of `q` strictly outside it.
inline bool separated_by_edge_of(const ConvexPolygon& p, const ConvexPolygon& q) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = p[i];
    const Point b = p[(i + 1) % n];
    const double tol = kGeomEps * std::max(1.0, distance(a, b));
    bool all_out = true;
    for (const Point v : q.vertices)
      if (orient(a, b, v) >= -tol) {
        all_out = false;
        break;
      }
    if (all_out) return true;
  }
  return false;
}

}  // namespace detail

/// Length of the shortest segment joining the two regions; 0 when they
/// overlap or touch.
inline double min_distance(const ConvexPolygon& p, const ConvexPolygon& q) {
  if (p.size() == 0 || q.size() == 0) return 0.0;
  if (!detail::separated_by_edge_of(p, q) && !detail::separated_by_edge_of(q, p)) return 0.0;
  const std::size_t n = p.size(), m = q.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      best = std::min(best, detail::point_segment_distance2(p[i], q[j], q[(j + 1) % m]));
      best = std::min(best, detail::point_segment_distance2(q[j], p[i], p[(i + 1) % n]));
    }
  const double d = std::sqrt(best);
  return d <= kGeomEps ? 0.0 : d;
}

}  // namespace morevis
