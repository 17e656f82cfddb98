#include "morevis/service.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "morevis/synthetic.hpp"

namespace morevis {
namespace {

nlohmann::json body(const Reply& r) { return nlohmann::json::parse(r.body); }

struct Served {
  MovingRegionDataset ds;
  Layout layout;
  std::string text;
  Service service;
  explicit Served(MovingRegionDataset d) : ds(std::move(d)) {
    layout = compute_layout(ds);
    text = dump_layout(layout);
    service.initialize(text, ds);
  }
};

// Four bars forming a square frame. Their intersection graph is a 4-cycle,
// which no arrangement of intervals reproduces, so one opposite pair must be
// drawn overlapping.
MovingRegionDataset frame_dataset() {
  MovingRegionDataset ds;
  ds.timesteps = {0};
  const auto bars = std::vector{box_polygon(0, 2, 3, 3), box_polygon(0, 0, 1, 3), box_polygon(0, 0, 3, 1),
                              box_polygon(2, 0, 3, 3)};
  for (int i = 0; i < 4; ++i) {
    ds.objects.push_back({"c" + std::to_string(i + 1), "", {}});
    ds.objects.back().observations[0].polygon = bars[i];
  }
  return ds;
}

TEST(Service, UnavailableBeforeInitialization) {
  Service s;
  EXPECT_FALSE(s.ready());
  EXPECT_EQ(s.get_layout().status, 503);
  EXPECT_EQ(s.get_intersections(0, 1).status, 503);
  EXPECT_EQ(s.get_object_track("x").status, 503);
  EXPECT_EQ(s.filter_objects("{}").status, 503);
}

TEST(Service, LayoutServedVerbatimWithStableEtag) {
  Served s(generate_synthetic_orbits(4, 6, 0));
  const auto a = s.service.get_layout(), b = s.service.get_layout();
  EXPECT_EQ(a.status, 200);
  EXPECT_EQ(a.body, s.text);
  EXPECT_EQ(a.headers.at("ETag"), b.headers.at("ETag"));
  EXPECT_EQ(s.service.get_layout(a.headers.at("ETag")).status, 304);
  EXPECT_EQ(s.service.get_layout("\"0\"").status, 200);
  EXPECT_EQ(parse_layout(a.body).layout, parse_layout(s.text).layout);
}

TEST(Service, IntersectionsOfGrowingPair) {
  Served s(generate_synthetic_orbits(4, 50, 0));
  const auto r = s.service.get_intersections(25, 49);
  ASSERT_EQ(r.status, 200);
  const auto slices = body(r);
  ASSERT_EQ(slices.size(), 25u);
  for (const auto& sl : slices) {
    bool found = false;
    for (const auto& e : sl.at("edges"))
      if (e.at("i") == "o1" && e.at("j") == "o2") {
        found = true;
        EXPECT_EQ(e.at("kind"), "real");
        const int t = sl.at("t");
        const double w = intersection_area(s.ds.objects[1].observations.at(t).polygon,
                                           s.ds.objects[2].observations.at(t).polygon) /
                         s.layout.area_scale;
        EXPECT_NEAR(e.at("w").get<double>(), w, 1e-9);
      }
    EXPECT_TRUE(found) << sl.at("t");
    for (const auto& n : sl.at("nodes")) EXPECT_TRUE(n == "o1" || n == "o2");
  }
  // Early timesteps have no overlaps: empty edge and node lists.
  for (const auto& sl : body(s.service.get_intersections(0, 5))) {
    EXPECT_TRUE(sl.at("edges").empty());
    EXPECT_TRUE(sl.at("nodes").empty());
  }
}

TEST(Service, SpuriousEdgeInFrame) {
  Served s(frame_dataset());
  const auto slices = body(s.service.get_intersections(0, 0));
  ASSERT_EQ(slices.size(), 1u);
  std::size_t real = 0, spurious = 0;
  for (const auto& e : slices[0].at("edges")) {
    if (e.at("kind") == "spurious") {
      ++spurious;
      EXPECT_EQ(e.at("w").get<double>(), 0.0);
      EXPECT_GT(e.at("overlap").get<double>(), 0.0);
      const auto pair = e.at("i").get<std::string>() + e.at("j").get<std::string>();
      EXPECT_TRUE(pair == "c1c3" || pair == "c2c4") << pair;
    } else {
      ++real;
      EXPECT_NEAR(e.at("w").get<double>(), 1.0 / s.layout.area_scale, 1e-9);
    }
  }
  EXPECT_EQ(real, 4u);
  EXPECT_GE(spurious, 1u);
  // Restricting to c1, c2 keeps only their shared edge.
  const auto restricted = body(s.service.get_intersections(0, 0, {"c1", "c2"}));
  EXPECT_EQ(restricted[0].at("edges").size(), 1u);
  EXPECT_EQ(restricted[0].at("nodes"), (nlohmann::json{"c1", "c2"}));
}

// The chain h = 0.5, w12 = w23 = 0.45 cannot come from real polygons (the
// two overlaps would not fit inside the middle region), so the served layout
// is assembled from the timestep solver directly.
TEST(Service, ForcedChainSliceHasOneSpuriousEdge) {
  const std::vector<std::vector<double>> w{{0, 0.45, 0}, {0.45, 0, 0.45}, {0, 0.45, 0}};
  const TimestepInput in{0, {"c1", "c2", "c3"}, {0.1, 0.5, 0.9}, {0.5, 0.5, 0.5}, w};
  const auto r = optimize_timestep(in, {});
  Layout l;
  l.object_ids = in.ids;
  l.timesteps = {0};
  l.area_scale = 1;
  for (std::size_t a = 0; a < 3; ++a) l.rects.push_back({in.ids[a], 0, r.y[a], 0.5, in.y_prime[a]});
  l.slices.push_back(r.slice);
  Service s;
  s.initialize(dump_layout(l), frame_dataset());
  const auto edges = body(s.get_intersections(0, 0))[0].at("edges");
  ASSERT_EQ(edges.size(), 3u);
  std::size_t spurious = 0;
  for (const auto& e : edges)
    if (e.at("kind") == "spurious") {
      ++spurious;
      EXPECT_EQ(e.at("i"), "c1");
      EXPECT_EQ(e.at("j"), "c3");
    } else {
      EXPECT_NEAR(e.at("w").get<double>(), 0.45, 1e-12);
    }
  EXPECT_EQ(spurious, 1u);
}

TEST(Service, BadRanges) {
  Served s(generate_synthetic_orbits(2, 5, 0));
  EXPECT_EQ(s.service.get_intersections(3, 1).status, 400);
  EXPECT_EQ(s.service.get_intersections(-1, 2).status, 400);
  EXPECT_EQ(s.service.get_intersections(0, 5).status, 400);
  EXPECT_EQ(s.service.get_intersections(0, 4, {"ghost"}).status, 400);
  EXPECT_EQ(s.service.get_intersections(std::nullopt, std::nullopt).status, 200);
}

TEST(Service, ObjectTrack) {
  auto ds = generate_synthetic_orbits(3, 4, 0);
  ds.objects[2].observations.erase(ds.objects[2].observations.begin(), std::next(ds.objects[2].observations.begin(), 3));
  Served s(ds);
  EXPECT_EQ(s.service.get_object_track("nobody").status, 404);
  const auto single = body(s.service.get_object_track("o2"));
  ASSERT_EQ(single.size(), 1u);
  const auto track = body(s.service.get_object_track("o0"));
  ASSERT_EQ(track.size(), 4u);
  for (std::size_t k = 0; k < track.size(); ++k) {
    const int t = track[k].at("t");
    EXPECT_EQ(t, static_cast<int>(k));
    const auto c = centroid(ds.objects[0].observations.at(t).polygon);
    EXPECT_NEAR(track[k].at("centroid")[0].get<double>(), c.x, 1e-12);
    EXPECT_NEAR(track[k].at("centroid")[1].get<double>(), c.y, 1e-12);
    EXPECT_EQ(track[k].at("polygon").size(), ds.objects[0].observations.at(t).polygon.size());
  }
}

TEST(Service, Filter) {
  Served s(generate_synthetic_orbits(4, 50, 0));
  EXPECT_EQ(body(s.service.filter_objects("{\"predicates\": []}")).at("ids").size(), 4u);
  EXPECT_EQ(body(s.service.filter_objects("")).at("ids").size(), 4u);
  EXPECT_TRUE(body(s.service.filter_objects(R"({"predicates":[{"attribute":"mean_area","min":5,"max":1}]})"))
                  .at("ids")
                  .empty());
  // The constant-radius object has the smallest mean area.
  double smallest_other = 1e300;
  for (std::size_t i = 1; i < 4; ++i) {
    double sum = 0;
    for (const auto& [t, obs] : s.ds.objects[i].observations) sum += area(obs.polygon);
    smallest_other = std::min(smallest_other, sum / static_cast<double>(s.ds.objects[i].observations.size()));
  }
  const auto ids = body(s.service.filter_objects(
      nlohmann::json{{"predicates", {{{"attribute", "mean_area"}, {"min", smallest_other}}}}}.dump()))["ids"];
  EXPECT_EQ(ids, (nlohmann::json{"o1", "o2", "o3"}));
  EXPECT_EQ(s.service.filter_objects(R"({"predicates":[{"attribute":"colour","min":0}]})").status, 400);
  EXPECT_EQ(s.service.filter_objects("not json").status, 400);
  EXPECT_EQ(s.service.filter_objects(R"({"predicates":[{"min":0}]})").status, 400);
  EXPECT_EQ(body(s.service.filter_objects(R"({"predicates":[{"attribute":"observation_count","min":50,"max":50}]})"))
                .at("ids")
                .size(),
            4u);
}

TEST(Service, ReadOnlyAndIdempotent) {
  Served s(frame_dataset());
  const auto before = s.service.get_layout().body;
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(s.service.get_intersections(0, 0).body, s.service.get_intersections(0, 0).body);
    s.service.filter_objects(R"({"predicates":[{"attribute":"path_length","max":0}]})");
  }
  EXPECT_EQ(s.service.get_layout().body, before);
}

TEST(Service, HttpRoundTrip) {
  Served s(frame_dataset());
  httplib::Server server;
  s.service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/layout");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, s.text);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  const auto etag = res->get_header_value("ETag");
  res = client.Get("/layout", {{"If-None-Match", etag}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 304);

  res = client.Get("/intersections?t0=0&t1=0&objects=c1,c2");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)[0].at("edges").size(), 1u);
  res = client.Get("/intersections?t0=x");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = client.Get("/objects/c2/track");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Get("/objects/zz/track");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = client.Post("/filter", R"({"predicates":[{"attribute":"wat"}]})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = client.Options("/filter");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_NE(res->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
  res = client.Get("/dataset");
  ASSERT_TRUE(res);
  EXPECT_EQ(from_regions_json(nlohmann::json::parse(res->body)), s.ds);

  server.stop();
  th.join();
}

TEST(Service, RejectsMismatchedDataset) {
  Service s;
  const auto text = dump_layout(compute_layout(frame_dataset()));
  EXPECT_THROW(s.initialize(text, generate_synthetic_orbits(2, 1, 0)), ValidationError);
  EXPECT_THROW(s.initialize("garbage", frame_dataset()), ParseError);
  EXPECT_FALSE(s.ready());
}

}  // namespace
}  // namespace morevis
