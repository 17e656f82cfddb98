#pragma once

// Synthetic moving-region datasets: the four-orbit scene plus pedestrian
// and storm scenes used for large-scale regression snapshots.

#include <cstdio>
#include <numbers>

#include "morevis/dataset.hpp"
#include "morevis/io.hpp"
#include "morevis/random.hpp"

namespace morevis {

/// Orbit scene parameters. Radii are in world units; `progress` s runs from
/// 0 at the first timestep to 1 at the last.
struct OrbitSceneConfig {
  int polygon_sides = 32;
  // Object role 0: small orbit, constant radius.
  double small_orbit_radius = 1.0;
  double small_circle_radius = 0.5;
  double small_revolutions = 2.0;
  // Roles 1 and 2: co-moving pair whose radius grows linearly while their
  // centres approach, so they start overlapping just before mid-period.
  double pair_orbit_radius = 4.0;
  double pair_revolutions = 1.0;
  double pair_radius_start = 0.3;
  double pair_radius_end = 1.0;
  double pair_separation_start = 2.0;
  double pair_separation_end = 0.4;
  // Role 3: counter-rotating object with shrinking radius.
  double outer_orbit_radius = 7.5;
  double outer_revolutions = -1.0;
  double outer_radius_start = 1.2;
  double outer_radius_end = 0.4;
  // Objects beyond the first four repeat the roles in scenes shifted by
  // this much along x.
  double cluster_spacing = 20.0;
};

/// Circles on orbits of different radii, discretised as regular polygons.
/// Object i plays role i % 4 (see OrbitSceneConfig). The seed only picks
/// the starting phases.
inline MovingRegionDataset generate_synthetic_orbits(int num_objects, int num_timesteps, std::uint64_t seed,
                                                     const OrbitSceneConfig& cfg = {}) {
  if (num_objects < 1) throw ValidationError("synthetic orbits: need at least one object");
  if (num_timesteps < 2) throw ValidationError("synthetic orbits: need at least two timesteps");
  Rng rng(seed);
  const int clusters = (num_objects + 3) / 4;
  std::vector<std::array<double, 3>> phases(static_cast<std::size_t>(clusters));
  for (auto& p : phases)
    for (auto& v : p) v = rng.uniform(0.0, 2.0 * std::numbers::pi);

  MovingRegionDataset ds;
  for (int t = 0; t < num_timesteps; ++t) ds.timesteps.push_back(t);
  static constexpr const char* kRoleNames[] = {"small", "pair-a", "pair-b", "counter"};
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < num_objects; ++i) {
    const int role = i % 4;
    const int cluster = i / 4;
    const Point origin{cluster * cfg.cluster_spacing, 0.0};
    const auto& ph = phases[static_cast<std::size_t>(cluster)];
    MovingObject obj;
    obj.id = "o" + std::to_string(i);
    obj.label = std::string(kRoleNames[role]) + (cluster ? "-" + std::to_string(cluster) : "");
    for (int t = 0; t < num_timesteps; ++t) {
      const double s = static_cast<double>(t) / (num_timesteps - 1);
      Point c;
      double r = 0.0;
      switch (role) {
        case 0: {
          const double a = ph[0] + two_pi * cfg.small_revolutions * s;
          c = origin + cfg.small_orbit_radius * Point{std::cos(a), std::sin(a)};
          r = cfg.small_circle_radius;
          break;
        }
        case 1:
        case 2: {
          const double a = ph[1] + two_pi * cfg.pair_revolutions * s;
          const double sep = cfg.pair_separation_start + (cfg.pair_separation_end - cfg.pair_separation_start) * s;
          const double orbit = cfg.pair_orbit_radius + (role == 1 ? -0.5 : 0.5) * sep;
          c = origin + orbit * Point{std::cos(a), std::sin(a)};
          r = cfg.pair_radius_start + (cfg.pair_radius_end - cfg.pair_radius_start) * s;
          break;
        }
        default: {
          const double a = ph[2] + two_pi * cfg.outer_revolutions * s;
          c = origin + cfg.outer_orbit_radius * Point{std::cos(a), std::sin(a)};
          r = cfg.outer_radius_start + (cfg.outer_radius_end - cfg.outer_radius_start) * s;
          break;
        }
      }
      RegionObservation obs;
      obs.polygon = regular_polygon(c, r, cfg.polygon_sides);
      obs.attributes["radius"] = r;
      obj.observations.emplace(t, std::move(obs));
    }
    ds.objects.push_back(std::move(obj));
  }
  ds.attribute_schema.push_back({"radius", AttributeKind::numeric});
  return ds;
}

// ---------------------------------------------------------------------------

struct PedestrianSceneConfig {
  int num_people = 14;
  int num_timesteps = 234;
  double frame_width = 1920.0;
  double frame_height = 1080.0;
  /// Box height at the top and bottom of the frame (perspective).
  double near_height = 260.0;
  double far_height = 90.0;
  double aspect = 0.42;
  double speed = 7.0;  // pixels per timestep
};

/// Bounding boxes of people walking through a camera frame: two walking
/// groups, a meeting that gathers five people mid-sequence, and people
/// entering and leaving (one of them leaving and coming back).
inline MovingRegionDataset generate_pedestrian_scene(std::uint64_t seed, const PedestrianSceneConfig& cfg = {}) {
  Rng rng(seed);
  const int T = cfg.num_timesteps;
  MovingRegionDataset ds;
  for (int t = 0; t < T; ++t) ds.timesteps.push_back(t);

  auto random_point = [&] {
    return Point{rng.uniform(0.08, 0.92) * cfg.frame_width, rng.uniform(0.25, 0.95) * cfg.frame_height};
  };
  // Piecewise-linear walk through random waypoints at constant speed.
  auto walk = [&](int steps, Point start) {
    std::vector<Point> path;
    Point cur = start, target = random_point();
    for (int k = 0; k < steps; ++k) {
      path.push_back(cur);
      const Point d = target - cur;
      const double len = std::hypot(d.x, d.y);
      const double v = cfg.speed * rng.uniform(0.6, 1.2);
      if (len < v) {
        cur = target;
        target = random_point();
      } else {
        cur = cur + (v / len) * d;
      }
    }
    return path;
  };

  const Point meeting = {0.5 * cfg.frame_width, 0.6 * cfg.frame_height};
  const int meet_start = T * 55 / 100, meet_end = T * 75 / 100;
  std::vector<std::vector<Point>> paths(static_cast<std::size_t>(cfg.num_people));
  std::vector<std::pair<int, int>> spans(paths.size());
  // Leaders: 0 leads {0,1,2}, 3 leads {3,4}.
  for (int p = 0; p < cfg.num_people; ++p) {
    int enter = static_cast<int>(rng.integer(0, T / 3));
    int exit = std::min(T, enter + static_cast<int>(rng.integer(T / 2, T)));
    if (p >= 5 && p <= 9) {
      enter = std::min(enter, meet_start - 30);
      exit = std::max(exit, meet_end + 10);
      exit = std::min(exit, T);
    }
    spans[static_cast<std::size_t>(p)] = {enter, exit};
    if (p == 1 || p == 2 || p == 4) {
      const int leader = p == 4 ? 3 : 0;
      spans[static_cast<std::size_t>(p)] = spans[static_cast<std::size_t>(leader)];
      const Point offset{rng.uniform(-0.35, 0.35) * cfg.far_height, rng.uniform(-12.0, 12.0)};
      for (const auto& q : paths[static_cast<std::size_t>(leader)]) paths[static_cast<std::size_t>(p)].push_back(q + offset);
      continue;
    }
    auto path = walk(T, random_point());
    if (p >= 5 && p <= 9) {
      // Converge on the meeting point and linger.
      const Point spot = meeting + Point{rng.uniform(-60.0, 60.0), rng.uniform(-20.0, 20.0)};
      for (int t = meet_start - 30; t < meet_end; ++t) {
        const double w = std::clamp((t - (meet_start - 30)) / 30.0, 0.0, 1.0);
        path[static_cast<std::size_t>(t)] = (1.0 - w) * path[static_cast<std::size_t>(t)] + w * spot;
      }
      for (int t = meet_end; t < T; ++t) {
        const double w = std::clamp((t - meet_end) / 20.0, 0.0, 1.0);
        path[static_cast<std::size_t>(t)] = (1.0 - w) * spot + w * path[static_cast<std::size_t>(t)];
      }
    }
    paths[static_cast<std::size_t>(p)] = std::move(path);
  }

  for (int p = 0; p < cfg.num_people; ++p) {
    MovingObject obj;
    obj.id = "person" + std::to_string(p);
    obj.label = obj.id;
    const auto [enter, exit] = spans[static_cast<std::size_t>(p)];
    // Person 10 steps out of view for a while.
    const int gap_from = p == 10 ? enter + (exit - enter) / 3 : -1;
    const int gap_to = p == 10 ? gap_from + (exit - enter) / 5 : -1;
    for (int t = enter; t < exit; ++t) {
      if (t >= gap_from && t < gap_to) continue;
      const Point c = paths[static_cast<std::size_t>(p)][static_cast<std::size_t>(t)];
      const double depth = std::clamp(c.y / cfg.frame_height, 0.0, 1.0);
      const double h = cfg.far_height + (cfg.near_height - cfg.far_height) * depth;
      const double w = cfg.aspect * h;
      RegionObservation obs;
      obs.polygon = box_polygon(c.x - 0.5 * w, c.y - h, c.x + 0.5 * w, c.y);
      obj.observations.emplace(t, std::move(obs));
    }
    if (!obj.observations.empty()) ds.objects.push_back(std::move(obj));
  }
  return ds;
}

// ---------------------------------------------------------------------------

struct StormSceneConfig {
  int num_storms = 70;
  int first_day = 212;   // day of year of the earliest genesis (Aug 1)
  int last_day = 296;    // latest genesis (Oct 23)
  double min_days = 3.0;
  double max_days = 16.0;
  int first_year = 2004;
  int last_year = 2020;
};

/// Six-hourly fixes of storms born off the west coast of Africa that drift
/// west, then recurve north-east while growing.
inline std::vector<StormFix> generate_storm_fixes(std::uint64_t seed, const StormSceneConfig& cfg = {}) {
  Rng rng(seed);
  std::vector<StormFix> fixes;
  static constexpr int kCum[] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334, 365};
  for (int s = 0; s < cfg.num_storms; ++s) {
    const int year = static_cast<int>(rng.integer(cfg.first_year, cfg.last_year));
    const double start_day = rng.uniform(cfg.first_day, cfg.last_day);
    const double days = rng.uniform(cfg.min_days, cfg.max_days);
    double lon = rng.uniform(-50.0, -20.0), lat = rng.uniform(10.0, 20.0);
    const double recurve = rng.uniform(0.4, 0.8);
    const double speed = rng.uniform(3.0, 5.5);  // degrees per day
    const double max_extent = rng.uniform(250.0, 900.0);
    const double peak_wind = rng.uniform(40.0, 140.0);
    const int n = static_cast<int>(days * 4.0);
    char id[16];
    std::snprintf(id, sizeof id, "AL%02d%04d", s % 30 + 1, year);
    for (int k = 0; k <= n; ++k) {
      const double s01 = static_cast<double>(k) / std::max(n, 1);
      const double hours = start_day * 24.0 + k * 6.0;
      const int doy = std::min(static_cast<int>(hours / 24.0), 364);
      int month = 0;
      while (kCum[month + 1] <= doy) ++month;
      const int day = doy - kCum[month] + 1;
      const int hh = static_cast<int>(std::fmod(hours, 24.0));
      char ts[32];
      std::snprintf(ts, sizeof ts, "%04d-%02d-%02dT%02d:00", year, month + 1, day, hh);
      StormFix f;
      f.id = std::string(id) + "-" + std::to_string(s);
      f.timestamp = ts;
      f.lon = lon;
      f.lat = lat;
      f.extent_km = 80.0 + (max_extent - 80.0) * std::sin(std::numbers::pi * std::min(1.0, 0.2 + s01));
      f.wind = std::round(peak_wind * std::sin(std::numbers::pi * std::min(0.95, 0.1 + s01)));
      f.pressure = std::round(1012.0 - 0.55 * *f.wind);
      fixes.push_back(f);
      // Heading: west-north-west before recurvature, north-east after.
      const double heading = s01 < recurve ? std::numbers::pi * (1.0 - 0.12) : std::numbers::pi * 0.25;
      const double step = speed / 4.0 * (1.0 + rng.uniform(-0.15, 0.15));
      lon += step * std::cos(heading);
      lat += step * std::sin(heading) + (s01 < recurve ? 0.1 : 0.0);
    }
  }
  return fixes;
}

}  // namespace morevis
