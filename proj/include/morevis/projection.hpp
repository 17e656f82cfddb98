#pragma once

// Initial 1D coordinates for every observation, fitted once over the whole
// dataset with time ignored.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "morevis/dataset.hpp"
#include "morevis/random.hpp"

namespace morevis {

enum class ProjectionMethod { pca_centroids, force_directed, hilbert, morton };
enum class DistanceMode { centroid, region };

inline const char* to_string(ProjectionMethod m) {
  switch (m) {
    case ProjectionMethod::pca_centroids: return "pca";
    case ProjectionMethod::force_directed: return "force";
    case ProjectionMethod::hilbert: return "hilbert";
    case ProjectionMethod::morton: return "morton";
  }
  return "?";
}

inline ProjectionMethod parse_projection_method(std::string_view s) {
  if (s == "pca" || s == "pca-centroids") return ProjectionMethod::pca_centroids;
  if (s == "force" || s == "force-directed") return ProjectionMethod::force_directed;
  if (s == "hilbert") return ProjectionMethod::hilbert;
  if (s == "morton") return ProjectionMethod::morton;
  throw ParseError("unknown projection '" + std::string(s) + "'");
}

inline const char* to_string(DistanceMode m) { return m == DistanceMode::centroid ? "centroid" : "region"; }

inline DistanceMode parse_distance_mode(std::string_view s) {
  if (s == "centroid") return DistanceMode::centroid;
  if (s == "region") return DistanceMode::region;
  throw ParseError("unknown distance mode '" + std::string(s) + "'");
}

struct ProjectionConfig {
  ProjectionMethod method = ProjectionMethod::pca_centroids;
  DistanceMode distance_mode = DistanceMode::region;  // force-directed only
  int curve_order = 10;                               // space-filling only, [4, 16]
  int iterations = 500;                               // force-directed only
  /// Step size relative to the majorization (Guttman) step; 1 takes the
  /// full step.
  double learning_rate = 1.0;
  std::uint64_t seed = 0;

  void check() const {
    if (curve_order < 4 || curve_order > 16) throw ValidationError("curve_order must be in [4, 16]");
    if (iterations <= 0) throw ValidationError("iterations must be positive");
    if (!(learning_rate > 0)) throw ValidationError("learning_rate must be positive");
  }
  friend bool operator==(const ProjectionConfig&, const ProjectionConfig&) = default;
};

struct ProjectionResult {
  /// y_prime[object index][timestep] in [0, 1].
  std::vector<std::map<int, double>> y_prime;
  std::map<std::string, double> diagnostics;

  double at(std::size_t object, int timestep) const { return y_prime.at(object).at(timestep); }
};

/// Affine min-max map onto [0, 1]; a constant input maps to 0.5.
inline std::vector<double> normalize(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double a = *lo, range = *hi - *lo;
  if (!(range > 0.0)) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (auto& v : out) v = (v - a) / range;
  return out;
}

// ---------------------------------------------------------------------------
// Space-filling curves on a 2^order × 2^order grid.

inline std::uint64_t morton_index(std::uint32_t x, std::uint32_t y) {
  auto spread = [](std::uint64_t v) {
    v &= 0xffffffffULL;
    v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
    v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
    v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
    v = (v | (v << 2)) & 0x3333333333333333ULL;
    v = (v | (v << 1)) & 0x5555555555555555ULL;
    return v;
  };
  return spread(x) | (spread(y) << 1);
}

/// Distance along the Hilbert curve of cell (x, y) in a grid of side
/// 2^order.
inline std::uint64_t hilbert_index(int order, std::uint32_t x, std::uint32_t y) {
  const std::uint64_t n = std::uint64_t{1} << order;
  std::uint64_t d = 0;
  std::uint64_t px = x, py = y;
  for (std::uint64_t s = n / 2; s > 0; s /= 2) {
    const std::uint64_t rx = (px & s) ? 1 : 0;
    const std::uint64_t ry = (py & s) ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        px = s - 1 - (px & (s - 1));
        py = s - 1 - (py & (s - 1));
      }
      std::swap(px, py);
    }
    px &= s - 1;
    py &= s - 1;
  }
  return d;
}

namespace detail {

struct ObservationRef {
  std::size_t object;
  int timestep;
  const RegionObservation* obs;
};

inline std::vector<ObservationRef> observations_of(const MovingRegionDataset& ds) {
  std::vector<ObservationRef> refs;
  refs.reserve(ds.observation_count());
  for (std::size_t i = 0; i < ds.objects.size(); ++i)
    for (const auto& [t, obs] : ds.objects[i].observations) refs.push_back({i, t, &obs});
  return refs;
}

inline std::vector<double> project_pca(const std::vector<Point>& c, std::map<std::string, double>& diag) {
  const double n = static_cast<double>(c.size());
  Point mean{};
  for (const auto& p : c) mean = mean + p;
  mean = (1.0 / n) * mean;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : c) {
    const Point d = p - mean;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  sxx /= n;
  sxy /= n;
  syy /= n;
  const double half_tr = 0.5 * (sxx + syy);
  const double disc = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
  const double l1 = half_tr + disc, l2 = half_tr - disc;
  Point axis;
  if (std::abs(sxy) > 1e-300) {
    axis = {l1 - syy, sxy};
  } else {
    axis = sxx >= syy ? Point{1, 0} : Point{0, 1};
  }
  const double len = std::hypot(axis.x, axis.y);
  axis = (1.0 / len) * axis;
  std::vector<double> s(c.size());
  double corr_x = 0, corr_y = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Point d = c[k] - mean;
    s[k] = dot(d, axis);
    corr_x += s[k] * d.x;
    corr_y += s[k] * d.y;
  }
  // Sign convention: non-negative correlation with x (then with y).
  const double scale = std::max(1.0, std::abs(l1)) * n * 1e-12;
  const bool flip = corr_x < -scale || (std::abs(corr_x) <= scale && corr_y < 0);
  if (flip)
    for (auto& v : s) v = -v;
  diag["explained_variance_ratio"] = l1 + l2 > 0 ? l1 / (l1 + l2) : 1.0;
  diag["axis_x"] = flip ? -axis.x : axis.x;
  diag["axis_y"] = flip ? -axis.y : axis.y;
  return s;
}

/// Classical (Torgerson) 1D scaling: leading eigenvector of
/// B = −½ J D² J by shifted power iteration, scaled by √λ.
inline std::vector<double> classical_scaling(const std::vector<double>& d, std::size_t n) {
  double shift = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < n; ++b) row += d[a * n + b] * d[a * n + b];
    shift = std::max(shift, row);
  }
  auto apply_b = [&](const std::vector<double>& v) {
    double mv = 0.0;
    for (double x : v) mv += x;
    mv /= static_cast<double>(n);
    std::vector<double> w(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) w[a] += d[a * n + b] * d[a * n + b] * (v[b] - mv);
    double mw = 0.0;
    for (double x : w) mw += x;
    mw /= static_cast<double>(n);
    for (auto& x : w) x = -0.5 * (x - mw);
    return w;
  };
  std::vector<double> v(n);
  for (std::size_t a = 0; a < n; ++a) v[a] = static_cast<double>(a) - 0.5 * static_cast<double>(n - 1) + 0.37 * std::sin(static_cast<double>(a));
  for (int it = 0; it < 300; ++it) {
    auto w = apply_b(v);
    double norm = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      w[a] += shift * v[a];
      norm += w[a] * w[a];
    }
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) break;
    for (std::size_t a = 0; a < n; ++a) v[a] = w[a] / norm;
  }
  const auto bv = apply_b(v);
  double lambda = 0.0;
  for (std::size_t a = 0; a < n; ++a) lambda += v[a] * bv[a];
  const double scale = std::sqrt(std::max(lambda, 1e-12));
  for (auto& x : v) x *= scale;
  return v;
}

inline double raw_stress(const std::vector<double>& y, const std::vector<double>& d) {
  const std::size_t n = y.size();
  double s = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double r = std::abs(y[a] - y[b]) - d[a * n + b];
      s += r * r;
    }
  return s;
}

/// Gradient descent on raw metric stress Σ_{a<b} (|y_a − y_b| − d_ab)²
/// with distances scaled to max 1. 1D stress has a local minimum for
/// nearly every ordering, so descent runs from the seeded random start and
/// from classical scaling, keeping the lower stress.
inline std::vector<double> project_force(const std::vector<ObservationRef>& refs, const ProjectionConfig& cfg,
                                         std::map<std::string, double>& diag) {
  const std::size_t n = refs.size();
  std::vector<Point> cents(n);
  for (std::size_t a = 0; a < n; ++a) cents[a] = centroid(refs[a].obs->polygon);
  std::vector<double> d(n * n, 0.0);
  double dmax = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = cfg.distance_mode == DistanceMode::centroid
                           ? distance(cents[a], cents[b])
                           : min_distance(refs[a].obs->polygon, refs[b].obs->polygon);
      d[a * n + b] = d[b * n + a] = v;
      dmax = std::max(dmax, v);
    }
  if (!(dmax > 0.0)) return std::vector<double>(n, 0.0);
  for (auto& v : d) v /= dmax;

  const double step = cfg.learning_rate / (2.0 * static_cast<double>(n));
  std::vector<double> grad(n);
  auto descend = [&](std::vector<double> y) {
    for (int it = 0; it < cfg.iterations; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
          const double diff = y[a] - y[b];
          const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
          const double g = 2.0 * (std::abs(diff) - d[a * n + b]) * sign;
          grad[a] += g;
          grad[b] -= g;
        }
      for (std::size_t a = 0; a < n; ++a) y[a] -= step * grad[a];
    }
    return y;
  };

  Rng rng(cfg.seed);
  std::vector<double> init(n);
  for (auto& v : init) v = 0.1 * rng.normal();
  auto y = descend(std::move(init));
  double best = raw_stress(y, d);
  diag["random_start_stress"] = best;
  auto alt = descend(classical_scaling(d, n));
  const double alt_stress = raw_stress(alt, d);
  diag["classical_start_stress"] = alt_stress;
  if (alt_stress < best) {
    y = std::move(alt);
    best = alt_stress;
  }
  double den = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) den += d[a * n + b] * d[a * n + b];
  diag["stress"] = best;
  diag["normalized_stress"] = den > 0 ? std::sqrt(best / den) : 0.0;
  return y;
}

inline std::vector<double> project_curve(const MovingRegionDataset& ds, const std::vector<Point>& c,
                                         const ProjectionConfig& cfg) {
  const auto box = ds.bounds();
  const double cells = static_cast<double>(std::uint64_t{1} << cfg.curve_order);
  const auto max_cell = static_cast<std::uint32_t>(cells - 1);
  auto cell = [&](double v, double lo, double hi) -> std::uint32_t {
    if (!(hi > lo)) return 0;
    const double f = std::floor((v - lo) / (hi - lo) * cells);
    return static_cast<std::uint32_t>(std::clamp(f, 0.0, static_cast<double>(max_cell)));
  };
  std::vector<double> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto x = cell(c[k].x, box.min.x, box.max.x);
    const auto y = cell(c[k].y, box.min.y, box.max.y);
    out[k] = static_cast<double>(cfg.method == ProjectionMethod::hilbert ? hilbert_index(cfg.curve_order, x, y)
                                                                          : morton_index(x, y));
  }
  return out;
}

}  // namespace detail

/// Fits one global 1D embedding over every observation and min-max
/// normalizes it. All-identical input yields 0.5 everywhere with the
/// `degenerate` diagnostic set.
inline ProjectionResult project(const MovingRegionDataset& ds, const ProjectionConfig& cfg = {}) {
  cfg.check();
  const auto refs = detail::observations_of(ds);
  ProjectionResult res;
  res.y_prime.resize(ds.objects.size());
  if (refs.empty()) return res;

  std::vector<Point> cents(refs.size());
  for (std::size_t k = 0; k < refs.size(); ++k) cents[k] = centroid(refs[k].obs->polygon);
  bool identical = true;
  for (const auto& c : cents) identical = identical && distance(c, cents.front()) <= kGeomEps;

  std::vector<double> raw;
  if (identical && cfg.method != ProjectionMethod::force_directed) {
    raw.assign(refs.size(), 0.0);
  } else {
    switch (cfg.method) {
      case ProjectionMethod::pca_centroids: raw = detail::project_pca(cents, res.diagnostics); break;
      case ProjectionMethod::force_directed: raw = detail::project_force(refs, cfg, res.diagnostics); break;
      case ProjectionMethod::hilbert:
      case ProjectionMethod::morton: raw = detail::project_curve(ds, cents, cfg); break;
    }
  }
  const auto y = normalize(raw);
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  res.diagnostics["degenerate"] = (*hi - *lo) > 0.0 ? 0.0 : 1.0;
  for (std::size_t k = 0; k < refs.size(); ++k) res.y_prime[refs[k].object][refs[k].timestep] = y[k];
  return res;
}

}  // namespace morevis
