#include "morevis/projection.hpp"

#include <gtest/gtest.h>

#include "morevis/synthetic.hpp"

namespace morevis {
namespace {

// One object per centre, each observed at every timestep with a small square.
MovingRegionDataset stationary(const std::vector<Point>& centres, int timesteps, double half = 0.005) {
  MovingRegionDataset ds;
  for (int t = 0; t < timesteps; ++t) ds.timesteps.push_back(t);
  for (std::size_t i = 0; i < centres.size(); ++i) {
    MovingObject o{"s" + std::to_string(i), "", {}};
    for (int t = 0; t < timesteps; ++t)
      o.observations[t].polygon = box_polygon(centres[i].x - half, centres[i].y - half, centres[i].x + half, centres[i].y + half);
    ds.objects.push_back(o);
  }
  return ds;
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize(std::vector<double>{2, 4, 6}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(normalize(std::vector<double>{7, 7}), (std::vector<double>{0.5, 0.5}));
  const std::vector<double> v{3, -1, 8, 2.5};
  std::vector<double> w;
  for (double x : v) w.push_back(-4 + 2.5 * x);
  const auto a = normalize(v), b = normalize(w);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(Pca, CollinearPointsKeepOrder) {
  const auto ds = stationary({{0, 0}, {1, 1}, {3, 3}, {4, 4}}, 2);
  const auto r = project(ds);
  const double expected[] = {0, 0.25, 0.75, 1};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(r.at(i, 0), expected[i], 1e-12);
    EXPECT_NEAR(r.at(i, 1), expected[i], 1e-12);
  }
  EXPECT_NEAR(r.diagnostics.at("explained_variance_ratio"), 1.0, 1e-12);
}

TEST(Pca, RotationInvariantUpToSign) {
  const auto ds = generate_synthetic_orbits(8, 12, 4);
  const auto base = project(ds);
  for (double angle : {0.3, 1.2, 2.5, 4.0}) {
    auto rotated = ds;
    const double c = std::cos(angle), s = std::sin(angle);
    for (auto& o : rotated.objects)
      for (auto& [t, obs] : o.observations)
        for (auto& v : obs.polygon.vertices) v = {c * v.x - s * v.y, s * v.x + c * v.y};
    const auto r = project(rotated);
    // Either identical or mirrored.
    double same = 0, mirrored = 0;
    for (std::size_t i = 0; i < ds.objects.size(); ++i)
      for (int t : ds.timesteps) {
        same = std::max(same, std::abs(r.at(i, t) - base.at(i, t)));
        mirrored = std::max(mirrored, std::abs(r.at(i, t) - (1 - base.at(i, t))));
      }
    EXPECT_LT(std::min(same, mirrored), 1e-9) << angle;
  }
}

TEST(Pca, SignFollowsX) {
  const auto ds = stationary({{5, 0}, {0, 0.1}, {-5, 0.2}}, 1);
  const auto r = project(ds);
  EXPECT_LT(r.at(2, 0), r.at(1, 0));
  EXPECT_LT(r.at(1, 0), r.at(0, 0));
}

TEST(Projection, DefinedOnlyForObservedPairs) {
  auto ds = generate_synthetic_orbits(3, 6, 1);
  ds.objects[1].observations.erase(2);
  ds.objects[1].observations.erase(3);
  for (auto method : {ProjectionMethod::pca_centroids, ProjectionMethod::force_directed, ProjectionMethod::hilbert,
                      ProjectionMethod::morton}) {
    ProjectionConfig cfg;
    cfg.method = method;
    cfg.iterations = 50;
    const auto r = project(ds, cfg);
    EXPECT_EQ(r.y_prime[1].size(), 4u);
    EXPECT_FALSE(r.y_prime[1].count(2));
    double lo = 1, hi = 0;
    for (const auto& m : r.y_prime)
      for (const auto& [t, v] : m) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    EXPECT_EQ(lo, 0.0) << to_string(method);
    EXPECT_EQ(hi, 1.0) << to_string(method);
  }
}

TEST(Projection, DegenerateInputGivesHalf) {
  const auto ds = stationary({{1, 1}, {1, 1}}, 3);
  for (auto method : {ProjectionMethod::pca_centroids, ProjectionMethod::hilbert, ProjectionMethod::force_directed}) {
    ProjectionConfig cfg;
    cfg.method = method;
    const auto r = project(ds, cfg);
    for (const auto& m : r.y_prime)
      for (const auto& [t, v] : m) EXPECT_EQ(v, 0.5);
    EXPECT_EQ(r.diagnostics.at("degenerate"), 1.0);
  }
}

TEST(SpaceFillingCurves, KnownIndices) {
  // Order-1 Hilbert visits (0,0), (0,1), (1,1), (1,0).
  EXPECT_EQ(hilbert_index(1, 0, 0), 0u);
  EXPECT_EQ(hilbert_index(1, 0, 1), 1u);
  EXPECT_EQ(hilbert_index(1, 1, 1), 2u);
  EXPECT_EQ(hilbert_index(1, 1, 0), 3u);
  EXPECT_EQ(morton_index(0, 0), 0u);
  EXPECT_EQ(morton_index(1, 0), 1u);
  EXPECT_EQ(morton_index(0, 1), 2u);
  EXPECT_EQ(morton_index(3, 3), 15u);
  // Hilbert is a bijection with unit steps between consecutive cells.
  const int order = 4;
  std::vector<std::pair<int, int>> cell(256);
  for (std::uint32_t x = 0; x < 16; ++x)
    for (std::uint32_t y = 0; y < 16; ++y) cell[hilbert_index(order, x, y)] = {static_cast<int>(x), static_cast<int>(y)};
  for (std::size_t d = 1; d < cell.size(); ++d)
    EXPECT_EQ(std::abs(cell[d].first - cell[d - 1].first) + std::abs(cell[d].second - cell[d - 1].second), 1);
}

TEST(SpaceFillingCurves, OriginMapsToZero) {
  const auto valid = stationary({{0.5, 0.5}, {10, 3}, {4, 8}}, 1, 0.5);
  ProjectionConfig cfg;
  cfg.method = ProjectionMethod::hilbert;
  EXPECT_EQ(project(valid, cfg).at(0, 0), 0.0);
  cfg.method = ProjectionMethod::morton;
  EXPECT_EQ(project(valid, cfg).at(0, 0), 0.0);
}

TEST(ForceDirected, ThreePointGapRatio) {
  // Region distances 0.99, 8.99, 9.98; exact 1D MDS keeps the 1:9 gaps.
  const auto ds = stationary({{0, 0}, {1, 0}, {10, 0}}, 2);
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    ProjectionConfig cfg;
    cfg.method = ProjectionMethod::force_directed;
    cfg.seed = seed;
    const auto r = project(ds, cfg);
    const double g1 = std::abs(r.at(1, 0) - r.at(0, 0));
    const double g2 = std::abs(r.at(2, 0) - r.at(1, 0));
    EXPECT_NEAR(g2 / g1, 8.99 / 0.99, 0.05 * 9) << seed;
    EXPECT_NEAR(r.at(0, 0), r.at(0, 1), 1e-6);
  }
}

TEST(ForceDirected, IntersectingRegionsStayClose) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto ds = generate_synthetic_orbits(8, 8, seed);
    ProjectionConfig cfg;
    cfg.method = ProjectionMethod::force_directed;
    cfg.seed = seed;
    const auto r = project(ds, cfg);
    std::vector<double> gaps, overlap_gaps;
    std::vector<std::tuple<std::size_t, int>> refs;
    for (std::size_t i = 0; i < ds.objects.size(); ++i)
      for (int t : ds.timesteps) refs.emplace_back(i, t);
    for (std::size_t a = 0; a < refs.size(); ++a)
      for (std::size_t b = a + 1; b < refs.size(); ++b) {
        const auto [i, s] = refs[a];
        const auto [j, u] = refs[b];
        const double gap = std::abs(r.at(i, s) - r.at(j, u));
        gaps.push_back(gap);
        if (intersection_area(ds.objects[i].observations.at(s).polygon, ds.objects[j].observations.at(u).polygon) > 0)
          overlap_gaps.push_back(gap);
      }
    std::sort(gaps.begin(), gaps.end());
    const double p95 = gaps[static_cast<std::size_t>(0.95 * static_cast<double>(gaps.size() - 1))];
    for (double g : overlap_gaps) EXPECT_LE(g, p95);
  }
}

TEST(Projection, DeterministicGivenSeed) {
  const auto ds = generate_synthetic_orbits(6, 10, 2);
  ProjectionConfig cfg;
  cfg.method = ProjectionMethod::force_directed;
  cfg.seed = 42;
  cfg.iterations = 100;
  EXPECT_EQ(project(ds, cfg).y_prime, project(ds, cfg).y_prime);
}

TEST(ProjectionConfig, Checks) {
  ProjectionConfig cfg;
  cfg.curve_order = 3;
  EXPECT_THROW(cfg.check(), ValidationError);
  cfg.curve_order = 17;
  EXPECT_THROW(cfg.check(), ValidationError);
  cfg.curve_order = 10;
  cfg.iterations = 0;
  EXPECT_THROW(cfg.check(), ValidationError);
  EXPECT_EQ(parse_projection_method("force"), ProjectionMethod::force_directed);
  EXPECT_EQ(parse_projection_method("pca"), ProjectionMethod::pca_centroids);
  EXPECT_THROW(parse_projection_method("tsne"), ParseError);
}

}  // namespace
}  // namespace morevis
