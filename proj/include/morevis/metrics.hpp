#pragma once

// Layout quality metrics: stress, crossings, jump distance, intersection
// area ratio and spurious intersections.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "morevis/dataset.hpp"
#include "morevis/layout.hpp"
#include "morevis/random.hpp"

namespace morevis {

struct MetricsReport {
  double stress = 0.0;
  double crossing_metric = 0.0;
  double jump_distance = 0.0;
  /// Absent when no pair intersects in 2D.
  std::optional<double> intersection_area_ratio_error;
  /// Absent when the plot shows no overlaps at all.
  std::optional<double> spurious_intersection_error;
  std::vector<double> per_timestep_runtimes;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

struct StressOptions {
  std::size_t sample_budget = 2'000'000;
  std::uint64_t seed = 0;
};

/// Minimum distance between two axis-aligned boxes.
inline double box_distance(double ax0, double ay0, double ax1, double ay1, double bx0, double by0, double bx1,
                           double by1) {
  const double dx = std::max({0.0, bx0 - ax1, ax0 - bx1});
  const double dy = std::max({0.0, by0 - ay1, ay0 - by1});
  return std::hypot(dx, dy);
}

/// Normalized stress between region distances and plotted rectangle
/// distances. Rectangles span column ± column_fill/2 horizontally, where the
/// column is the timestep's position in the layout.
inline double stress(const MovingRegionDataset& ds, const Layout& layout, const StressOptions& opt = {}) {
  struct Item {
    const ConvexPolygon* polygon;
    double x0, x1, y0, y1;
  };
  std::map<int, double> column;
  for (std::size_t k = 0; k < layout.timesteps.size(); ++k) column[layout.timesteps[k]] = static_cast<double>(k);
  const double half = 0.5 * layout.config.column_fill;
  std::vector<Item> items;
  for (const auto& r : layout.rects) {
    const auto idx = ds.object_index(r.object_id);
    if (!idx) throw ValidationError("layout object '" + r.object_id + "' is not in the dataset", r.object_id);
    const auto& obs = ds.objects[*idx].observations;
    const auto it = obs.find(r.timestep);
    if (it == obs.end()) throw ValidationError("layout rect has no matching observation", r.object_id);
    const double x = column.at(r.timestep);
    items.push_back({&it->second.polygon, x - half, x + half, r.bottom(), r.top()});
  }
  const std::size_t n = items.size();
  if (n < 2) return 0.0;

  std::vector<double> d, dhat;
  auto add = [&](std::size_t a, std::size_t b) {
    const auto& p = items[a];
    const auto& q = items[b];
    d.push_back(min_distance(*p.polygon, *q.polygon));
    dhat.push_back(box_distance(p.x0, p.y0, p.x1, p.y1, q.x0, q.y0, q.x1, q.y1));
  };
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (total <= static_cast<double>(opt.sample_budget)) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) add(a, b);
  } else {
    Rng rng(opt.seed);
    for (std::size_t s = 0; s < opt.sample_budget; ++s) {
      const auto a = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(n) - 1));
      auto b = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(n) - 2));
      if (b >= a) ++b;
      add(a, b);
    }
  }
  const double dmax = *std::max_element(d.begin(), d.end());
  const double hmax = *std::max_element(dhat.begin(), dhat.end());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = dmax > 0 ? d[i] / dmax : 0.0;
    const double y = hmax > 0 ? dhat[i] / hmax : 0.0;
    num += (x - y) * (x - y);
    den += x * x;
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : 1.0;
  return std::sqrt(num / den);
}

namespace detail {

/// (id → y) for objects drawn at one timestep.
inline std::map<int, std::map<std::string, double>> positions_by_timestep(const Layout& layout) {
  std::map<int, std::map<std::string, double>> out;
  for (const auto& r : layout.rects) out[r.timestep][r.object_id] = r.y_center;
  return out;
}

/// Ranks 1..n by y among the given ids, ties by id.
inline std::map<std::string, double> ranks(const std::map<std::string, double>& y,
                                           const std::vector<std::string>& ids) {
  auto sorted = ids;
  std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) { return y.at(a) < y.at(b); });
  std::map<std::string, double> r;
  for (std::size_t i = 0; i < sorted.size(); ++i) r[sorted[i]] = static_cast<double>(i + 1);
  return r;
}

template <class F>
double average_over_columns(const Layout& layout, F per_pair) {
  if (layout.timesteps.size() < 2) return 0.0;
  const auto pos = positions_by_timestep(layout);
  const std::map<std::string, double> none;
  double sum = 0;
  for (std::size_t k = 0; k + 1 < layout.timesteps.size(); ++k) {
    const auto a = pos.find(layout.timesteps[k]);
    const auto b = pos.find(layout.timesteps[k + 1]);
    const auto& ya = a == pos.end() ? none : a->second;
    const auto& yb = b == pos.end() ? none : b->second;
    std::vector<std::string> both;
    for (const auto& [id, y] : ya)
      if (yb.count(id)) both.push_back(id);
    sum += per_pair(ya, yb, both);
  }
  return sum / static_cast<double>(layout.timesteps.size() - 1);
}

}  // namespace detail

/// Mean number of order swaps between consecutive columns.
inline double crossing_metric(const Layout& layout) {
  return detail::average_over_columns(layout, [](const auto& ya, const auto& yb, const auto& ids) {
    double swaps = 0;
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const double d0 = ya.at(ids[i]) - ya.at(ids[j]);
        const double d1 = yb.at(ids[i]) - yb.at(ids[j]);
        if (d0 * d1 < 0) ++swaps;
      }
    return swaps;
  });
}

/// Mean total rank change between consecutive columns.
inline double jump_distance(const Layout& layout) {
  return detail::average_over_columns(layout, [](const auto& ya, const auto& yb, const auto& ids) {
    const auto ra = detail::ranks(ya, ids), rb = detail::ranks(yb, ids);
    double sum = 0;
    for (const auto& id : ids) sum += std::abs(ra.at(id) - rb.at(id));
    return sum;
  });
}

/// Mean of I/w over all intersecting pairs.
inline std::optional<double> intersection_area_ratio_error(const Layout& layout) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& s : layout.slices)
    for (const auto& p : s.pairs)
      if (p.intersecting()) {
        sum += p.overlap / p.w;
        ++n;
      }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

/// Share of drawn overlaps that have no 2D counterpart.
inline std::optional<double> spurious_intersection_error(const Layout& layout) {
  std::size_t spurious = 0, drawn = 0;
  for (const auto& s : layout.slices)
    for (const auto& p : s.pairs) {
      if (!(p.overlap > kOverlapEps)) continue;
      ++drawn;
      spurious += !p.intersecting();
    }
  if (drawn == 0) return std::nullopt;
  return static_cast<double>(spurious) / static_cast<double>(drawn);
}

inline MetricsReport compute_metrics(const MovingRegionDataset& ds, const Layout& layout,
                                     const StressOptions& opt = {}) {
  MetricsReport m;
  m.stress = stress(ds, layout, opt);
  m.crossing_metric = crossing_metric(layout);
  m.jump_distance = jump_distance(layout);
  m.intersection_area_ratio_error = intersection_area_ratio_error(layout);
  m.spurious_intersection_error = spurious_intersection_error(layout);
  for (const auto& s : layout.slices) m.per_timestep_runtimes.push_back(s.runtime_seconds);
  return m;
}

}  // namespace morevis
