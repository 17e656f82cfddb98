#include "morevis/export.hpp"
#include "morevis/render.hpp"

#include <gtest/gtest.h>

#include <regex>

#include "morevis/synthetic.hpp"

namespace morevis {
namespace {

MovingRegionDataset one_object(int timesteps) {
  MovingRegionDataset ds;
  ds.objects.push_back({"solo", "", {}});
  for (int t = 0; t < timesteps; ++t) {
    ds.timesteps.push_back(t);
    ds.objects[0].observations[t].polygon = box_polygon(t, 0, t + 1, 1);
  }
  return ds;
}

// Two objects that never intersect but swap order: their one link pair
// crosses spuriously.
struct SwapFixture {
  MovingRegionDataset ds;
  Layout layout;
  SwapFixture() {
    ds.timesteps = {0, 1};
    ds.objects.push_back({"a", "", {}});
    ds.objects.push_back({"b", "", {}});
    ds.objects[0].observations[0].polygon = box_polygon(0, 0, 1, 1);
    ds.objects[0].observations[1].polygon = box_polygon(5, 0, 6, 1);
    ds.objects[1].observations[0].polygon = box_polygon(5, 0, 6, 1);
    ds.objects[1].observations[1].polygon = box_polygon(0, 0, 1, 1);
    layout = compute_layout(ds);
  }
};

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

TEST(LayoutJson, MinimalDocument) {
  const auto l = compute_layout(one_object(1));
  const auto j = layout_to_json(l);
  EXPECT_EQ(j.at("schema"), "morevis-layout");
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("rects").size(), 1u);
  EXPECT_EQ(j.at("links").size(), 0u);
  EXPECT_FALSE(j.contains("metrics"));
  EXPECT_FALSE(j.at("slices")[0].contains("runtime_seconds"));
}

TEST(LayoutJson, RoundTripIsIdentity) {
  const auto ds = generate_synthetic_orbits(6, 15, 2);
  LayoutConfig cfg;
  cfg.projection.method = ProjectionMethod::force_directed;
  cfg.projection.iterations = 50;
  cfg.lambda2 = 3.5;
  const auto l = compute_layout(ds, cfg);
  const auto m = compute_metrics(ds, l);
  const ExportOptions timed{true};
  const auto doc = parse_layout(dump_layout(l, m, timed));
  EXPECT_EQ(doc.layout, l);
  ASSERT_TRUE(doc.metrics.has_value());
  EXPECT_EQ(*doc.metrics, m);
  EXPECT_EQ(dump_layout(doc.layout, doc.metrics, timed), dump_layout(l, m, timed));

  // Without timings the runtimes read back as zero and nothing else changes.
  auto untimed = parse_layout(dump_layout(l)).layout;
  auto expected = l;
  for (auto& s : expected.slices) s.runtime_seconds = 0;
  EXPECT_EQ(untimed, expected);
}

TEST(LayoutJson, RoundTripKeepsSpuriousFlagsAndPairs) {
  SwapFixture f;
  ASSERT_TRUE(f.layout.links[0].spurious());
  const auto back = parse_layout(dump_layout(f.layout)).layout;
  EXPECT_EQ(back.links, f.layout.links);
}

TEST(LayoutJson, Rejects) {
  EXPECT_THROW(parse_layout("{"), ParseError);
  EXPECT_THROW(parse_layout("{\"schema\": \"other\", \"version\": 1}"), ParseError);
  auto j = layout_to_json(compute_layout(one_object(2)));
  j["version"] = 2;
  EXPECT_THROW(layout_from_json(j), ParseError);
  j["version"] = 1;
  j["slices"][0]["groups"][0]["status"] = "bogus";
  EXPECT_THROW(layout_from_json(j), ParseError);
  j = layout_to_json(compute_layout(one_object(2)));
  j["rects"][0].erase("y");
  EXPECT_THROW(layout_from_json(j), ParseError);
  EXPECT_THROW(load_layout("/nonexistent/layout.json"), ParseError);
}

TEST(SpatialColor, CornersCentreAndBilinear) {
  BoundingBox box;
  box.expand({0, 0});
  box.expand({1, 1});
  const auto& c = kDefaultCorners;
  EXPECT_EQ(spatial_color(box, {0, 0}), c[0]);
  EXPECT_EQ(spatial_color(box, {1, 0}), c[1]);
  EXPECT_EQ(spatial_color(box, {0, 1}), c[2]);
  EXPECT_EQ(spatial_color(box, {1, 1}), c[3]);
  const auto mid = spatial_color(box, {0.5, 0.5});
  EXPECT_NEAR(mid.r, (c[0].r + c[1].r + c[2].r + c[3].r) / 4, 1e-12);
  EXPECT_NEAR(mid.g, (c[0].g + c[1].g + c[2].g + c[3].g) / 4, 1e-12);
  EXPECT_NEAR(mid.b, (c[0].b + c[1].b + c[2].b + c[3].b) / 4, 1e-12);
  const auto q = spatial_color(box, {0.25, 0});
  EXPECT_NEAR(q.r, 0.75 * c[0].r + 0.25 * c[1].r, 1e-12);
  EXPECT_NEAR(q.g, 0.75 * c[0].g + 0.25 * c[1].g, 1e-12);
  EXPECT_NEAR(q.b, 0.75 * c[0].b + 0.25 * c[1].b, 1e-12);
  // Outside points clamp to the box.
  EXPECT_EQ(spatial_color(box, {-3, 7}), c[2]);
  EXPECT_EQ(to_hex({0, 128, 128}), "#008080");
}

TEST(RenderSvg, ElementCounts) {
  const auto ds = one_object(2);
  const auto svg = render_svg(compute_layout(ds), ds);
  EXPECT_EQ(count(svg, "<rect"), 2u);
  EXPECT_EQ(count(svg, "class=\"band\""), 1u);
  EXPECT_EQ(count(svg, "band spurious"), 0u);
  EXPECT_EQ(count(svg, "class=\"bar\""), 2u);
}

TEST(RenderSvg, SpuriousCrossingIsHatched) {
  SwapFixture f;
  const auto svg = render_svg(f.layout, f.ds);
  EXPECT_EQ(count(svg, "class=\"band spurious\""), 2u);
  EXPECT_EQ(count(svg, "fill=\"url(#hatch)\""), 2u);
  EXPECT_EQ(count(svg, "<pattern id=\"hatch\""), 1u);
}

TEST(RenderSvg, RectHeightsProportional) {
  const auto ds = generate_synthetic_orbits(6, 10, 1);
  const auto l = compute_layout(ds);
  RenderSpec spec;
  spec.width = 900;
  spec.height = 700;
  const auto svg = render_svg(l, ds, spec);
  const auto f = plot_frame(l, spec);
  const std::regex re("<rect data-object=\"([^\"]+)\" data-t=\"(-?\\d+)\" x=\"[^\"]+\" y=\"[^\"]+\" width=\"[^\"]+\" height=\"([^\"]+)\"");
  std::size_t seen = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    const auto* r = l.rect((*it)[1], std::stoi((*it)[2]));
    ASSERT_NE(r, nullptr);
    EXPECT_NEAR(std::stod((*it)[3]) / f.height, r->height / (f.y_hi - f.y_lo), 0.01 / f.height);
    ++seen;
  }
  EXPECT_EQ(seen, l.rects.size());
}

TEST(RenderSvg, BarChartMaxMatchesSlices) {
  for (const auto& ds : {generate_synthetic_orbits(8, 50, 0), SwapFixture().ds}) {
    const auto l = compute_layout(ds);
    std::size_t expected = 0;
    for (const auto& s : l.slices) {
      std::size_t b = 0;
      for (const auto& p : s.pairs) b += !p.intersecting();
      if (s.f2) expected = std::max(expected, static_cast<std::size_t>(std::lround(*s.f2 * static_cast<double>(b))));
    }
    const auto svg = render_svg(l, ds);
    const std::regex re("data-count=\"(\\d+)\"");
    std::size_t max_count = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it)
      max_count = std::max<std::size_t>(max_count, std::stoul((*it)[1]));
    EXPECT_EQ(max_count, expected);
  }
}

TEST(RenderSvg, DeterministicAndColorModes) {
  auto ds = generate_synthetic_orbits(4, 8, 3);
  const auto l = compute_layout(ds);
  EXPECT_EQ(render_svg(l, ds), render_svg(l, ds));
  RenderSpec spec;
  spec.color_mode = ColorMode::identity_palette;
  const auto svg = render_svg(l, ds, spec);
  EXPECT_NE(svg.find(to_hex(palette_color(0))), std::string::npos);

  spec.color_mode = ColorMode::attribute;
  EXPECT_THROW(render_svg(l, ds, spec), ValidationError);
  spec.attribute_name = "nope";
  EXPECT_THROW(render_svg(l, ds, spec), ValidationError);
  spec.color_mode = ColorMode::spatial_colormap;
  EXPECT_THROW(render_svg(l, ds, spec), ValidationError);

  ds.attribute_schema.push_back({"speed", AttributeKind::numeric});
  double v = 0;
  for (auto& o : ds.objects)
    for (auto& [t, obs] : o.observations) obs.attributes["speed"] = v++;
  spec.color_mode = ColorMode::attribute;
  spec.attribute_name = "speed";
  const auto colored = render_svg(l, ds, spec);
  EXPECT_NE(colored.find(to_hex(ramp_color(0))), std::string::npos);
  EXPECT_NE(colored.find(to_hex(ramp_color(1))), std::string::npos);
  EXPECT_THROW(parse_color_mode("rainbow"), ParseError);
}

TEST(Colorbar, BlendsCoveringRects) {
  Layout l;
  l.rects = {{"a", 0, 0.25, 0.5, 0}, {"b", 0, 0.75, 0.5, 0}, {"c", 1, 0.5, 1.0, 0}};
  std::map<std::pair<std::string, int>, Color> colors{
      {{"a", 0}, {255, 0, 0}}, {{"b", 0}, {0, 0, 255}}, {{"c", 1}, {0, 255, 0}}};
  const auto cells = colorbar_cells(l, colors, 0, 1, 4);
  ASSERT_TRUE(cells[0].has_value());
  EXPECT_NEAR(cells[0]->r, 127.5, 1e-9);
  EXPECT_NEAR(cells[0]->g, 127.5, 1e-9);
  EXPECT_NEAR(cells[0]->b, 0.0, 1e-9);
  EXPECT_NEAR(cells[3]->b, 127.5, 1e-9);
}

}  // namespace
}  // namespace morevis
