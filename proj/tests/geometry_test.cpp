#include "morevis/geometry.hpp"

#include <gtest/gtest.h>

#include "morevis/random.hpp"

namespace morevis {
namespace {

const ConvexPolygon kUnitSquare = box_polygon(0, 0, 1, 1);

// Fraction of uniform samples in the bounding box of p that land in both.
double monte_carlo_intersection(const ConvexPolygon& p, const ConvexPolygon& q, int samples, Rng& rng) {
  const auto b = bounding_box(p);
  int hits = 0;
  for (int k = 0; k < samples; ++k) {
    const Point s{rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y)};
    if (contains(p, s, 0.0) && contains(q, s, 0.0)) ++hits;
  }
  return (b.max.x - b.min.x) * (b.max.y - b.min.y) * hits / samples;
}

// Minimum distance between densely sampled boundary points.
double sampled_boundary_distance(const ConvexPolygon& p, const ConvexPolygon& q, int per_edge) {
  auto sample = [per_edge](const ConvexPolygon& poly) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (int k = 0; k < per_edge; ++k)
        pts.push_back(poly[i] + (static_cast<double>(k) / per_edge) * (poly[(i + 1) % poly.size()] - poly[i]));
    return pts;
  };
  double best = 1e300;
  for (const auto& a : sample(p))
    for (const auto& b : sample(q)) best = std::min(best, distance(a, b));
  return best;
}

ConvexPolygon random_convex(Rng& rng, Point center, double radius) {
  std::vector<Point> pts;
  for (int k = 0; k < 12; ++k) {
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    const double r = radius * std::sqrt(rng.uniform());
    pts.push_back(center + r * Point{std::cos(a), std::sin(a)});
  }
  return convex_hull(pts);
}

TEST(Area, BasicShapes) {
  EXPECT_DOUBLE_EQ(area(kUnitSquare), 1.0);
  EXPECT_DOUBLE_EQ(area(ConvexPolygon{{{0, 0}, {2, 0}, {0, 2}}}), 2.0);
  // n/2 · sin(2π/n) for the regular n-gon of circumradius 1.
  EXPECT_NEAR(area(regular_polygon({0, 0}, 1.0, 32)), 16.0 * std::sin(2 * std::numbers::pi / 32), 1e-12);
  EXPECT_NEAR(area(regular_polygon({0, 0}, 1.0, 32)), 3.1214, 1e-4);
}

TEST(IntersectionArea, KnownCases) {
  EXPECT_NEAR(intersection_area(kUnitSquare, translated(kUnitSquare, {0.5, 0})), 0.5, 1e-12);
  EXPECT_NEAR(intersection_area(kUnitSquare, kUnitSquare), 1.0, 1e-12);
  EXPECT_EQ(intersection_area(kUnitSquare, translated(kUnitSquare, {3, 0})), 0.0);
  // Touching along an edge has zero area.
  EXPECT_EQ(intersection_area(kUnitSquare, translated(kUnitSquare, {1, 0})), 0.0);
}

TEST(IntersectionArea, RotatedSquareMatchesMonteCarlo) {
  const auto diamond = regular_polygon({0.5, 0.5}, std::sqrt(0.5), 4);
  ASSERT_NEAR(area(diamond), 1.0, 1e-12);
  Rng rng(7);
  const double oracle = monte_carlo_intersection(kUnitSquare, diamond, 400000, rng);
  const double exact = intersection_area(kUnitSquare, diamond);
  EXPECT_NEAR(oracle, 2 * (std::sqrt(2.0) - 1), 3e-3);
  EXPECT_NEAR(exact, oracle, 3e-3);
  EXPECT_NEAR(exact, 2 * (std::sqrt(2.0) - 1), 1e-12);
}

TEST(Centroid, KnownCasesAndEquivariance) {
  EXPECT_NEAR(centroid(kUnitSquare).x, 0.5, 1e-15);
  EXPECT_NEAR(centroid(kUnitSquare).y, 0.5, 1e-15);
  const auto c = centroid(ConvexPolygon{{{0, 0}, {3, 0}, {0, 3}}});
  EXPECT_NEAR(c.x, 1.0, 1e-12);
  EXPECT_NEAR(c.y, 1.0, 1e-12);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto p = random_convex(rng, {rng.uniform(-5, 5), rng.uniform(-5, 5)}, 2.0);
    const Point v{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    const auto a = centroid(p), b = centroid(translated(p, v));
    EXPECT_NEAR(b.x, a.x + v.x, 1e-9);
    EXPECT_NEAR(b.y, a.y + v.y, 1e-9);
    EXPECT_TRUE(contains(p, a));
  }
}

TEST(MinDistance, KnownCases) {
  EXPECT_NEAR(min_distance(kUnitSquare, translated(kUnitSquare, {3, 0})), 2.0, 1e-12);
  EXPECT_EQ(min_distance(kUnitSquare, translated(kUnitSquare, {0.5, 0.5})), 0.0);
  EXPECT_EQ(min_distance(kUnitSquare, translated(kUnitSquare, {1, 0})), 0.0);
  const auto tiny = box_polygon(2, 2, 2 + 1e-6, 2 + 1e-6);
  const double oracle = sampled_boundary_distance(kUnitSquare, tiny, 400);
  EXPECT_NEAR(oracle, std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(min_distance(kUnitSquare, tiny), oracle, 1e-3);
}

TEST(MinDistance, MatchesSampledBoundaryOracle) {
  Rng rng(11);
  for (int k = 0; k < 30; ++k) {
    const auto p = random_convex(rng, {0, 0}, 1.0);
    const auto q = random_convex(rng, {rng.uniform(1.5, 4), rng.uniform(-2, 2)}, 1.0);
    const double d = min_distance(p, q);
    EXPECT_NEAR(d, min_distance(q, p), 1e-12);
    if (d > 0) {
      EXPECT_NEAR(d, sampled_boundary_distance(p, q, 300), 2e-2);
    }
  }
}

TEST(ConvexHull, SquareWithCentre) {
  const auto h = convex_hull({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
  EXPECT_EQ(h.size(), 4u);
  EXPECT_NEAR(area(h), 1.0, 1e-12);
  EXPECT_EQ(classify_polygon(h.vertices), PolygonDefect::none);
  EXPECT_EQ(convex_hull(h.vertices), h);
}

TEST(ConvexHull, ContainsRandomDiskPoints) {
  Rng rng(5);
  std::vector<Point> pts;
  for (int k = 0; k < 100; ++k) {
    const double a = rng.uniform(0, 2 * std::numbers::pi), r = std::sqrt(rng.uniform());
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  const auto h = convex_hull(pts);
  for (const auto& p : pts) EXPECT_TRUE(contains(h, p, 1e-9));
  EXPECT_EQ(classify_polygon(h.vertices), PolygonDefect::none);
}

TEST(ConvexHull, RejectsCollinearInput) {
  EXPECT_THROW(convex_hull({{0, 0}, {1, 1}, {2, 2}, {3, 3}}), ValidationError);
  EXPECT_THROW(convex_hull({{0, 0}, {1, 1}}), ValidationError);
}

TEST(Classify, Defects) {
  EXPECT_EQ(classify_polygon(kUnitSquare.vertices), PolygonDefect::none);
  std::vector<Point> cw(kUnitSquare.vertices.rbegin(), kUnitSquare.vertices.rend());
  EXPECT_EQ(classify_polygon(cw), PolygonDefect::winding);
  const std::vector<Point> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  EXPECT_EQ(classify_polygon(bowtie), PolygonDefect::non_convex);
  const std::vector<Point> dart{{0, 0}, {2, 0}, {1, 0.3}, {1, 2}};
  EXPECT_EQ(classify_polygon(dart), PolygonDefect::non_convex);
  // Pentagram: every turn is a left turn but it winds twice.
  std::vector<Point> star;
  for (int k = 0; k < 5; ++k) {
    const double a = 2 * std::numbers::pi * (2 * k) / 5;
    star.push_back({std::cos(a), std::sin(a)});
  }
  EXPECT_EQ(classify_polygon(star), PolygonDefect::non_convex);
  EXPECT_EQ(classify_polygon(std::vector<Point>{{0, 0}, {1, 0}}), PolygonDefect::too_few_vertices);
  EXPECT_EQ(classify_polygon(std::vector<Point>{{0, 0}, {1, 0}, {1, 0}, {0, 1}}), PolygonDefect::repeated_vertex);
  EXPECT_EQ(classify_polygon(std::vector<Point>{{0, 0}, {1, 0}, {2, 0}}), PolygonDefect::degenerate);
}

// Orientation-sign oracle: a simple polygon is convex iff for every edge all
// other vertices lie strictly on one side.
bool convex_by_triples(const std::vector<Point>& v) {
  const std::size_t n = v.size();
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i || k == (i + 1) % n) continue;
      const double o = orient(v[i], v[(i + 1) % n], v[k]);
      const int s = o > 0 ? 1 : (o < 0 ? -1 : 0);
      if (s == 0) return false;
      if (sign == 0) sign = s;
      if (s != sign) return false;
    }
  return true;
}

TEST(Classify, AgreesWithTripleOracleOnRandomQuads) {
  Rng rng(19);
  for (int k = 0; k < 500; ++k) {
    std::vector<Point> quad;
    for (int i = 0; i < 4; ++i) quad.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
    const auto defect = classify_polygon(quad);
    const bool convex = defect == PolygonDefect::none || defect == PolygonDefect::winding;
    EXPECT_EQ(convex, convex_by_triples(quad)) << k;
  }
}

TEST(GeometryProperties, FuzzedInvariants) {
  Rng rng(23);
  for (int k = 0; k < 200; ++k) {
    const auto p = random_convex(rng, {0, 0}, 1.0);
    const auto q = random_convex(rng, {rng.uniform(-2, 2), rng.uniform(-2, 2)}, rng.uniform(0.2, 1.5));
    const double w = intersection_area(p, q);
    EXPECT_NEAR(w, intersection_area(q, p), 1e-12);
    EXPECT_LE(w, std::min(area(p), area(q)) + 1e-12);
    const double d = min_distance(p, q);
    if (w > 0) {
      EXPECT_EQ(d, 0.0);
    }
    if (d > 0) {
      EXPECT_EQ(w, 0.0);
    }
    const Point v{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    EXPECT_NEAR(intersection_area(translated(p, v), translated(q, v)), w, 1e-9);
    EXPECT_NEAR(min_distance(translated(p, v), translated(q, v)), d, 1e-9);
  }
  // Containment attains the upper bound.
  const auto big = regular_polygon({0, 0}, 3.0, 16);
  const auto small = regular_polygon({0.2, 0.1}, 0.5, 9);
  EXPECT_NEAR(intersection_area(big, small), area(small), 1e-12);
}

}  // namespace
}  // namespace morevis
