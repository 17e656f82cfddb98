#pragma once

// Time slices, area scaling, per-timestep intersection optimization and
// spurious-crossing flagging.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "morevis/dataset.hpp"
#include "morevis/error.hpp"
#include "morevis/miqp.hpp"
#include "morevis/projection.hpp"

namespace morevis {

/// Overlaps at or below this are treated as touching, not intersecting.
inline constexpr double kOverlapEps = 1e-9;

struct LayoutConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double column_fill = 0.6;
  std::size_t max_group_binaries = 30;
  ProjectionConfig projection;
  /// Box on group positions; makes the big-M constant valid.
  double y_min = -1.0;
  double y_max = 2.0;
  std::size_t node_limit = 200000;
  /// Worker threads for per-timestep solves; 0 uses the hardware count.
  /// Does not affect results.
  unsigned jobs = 0;

  void check() const {
    if (!(lambda1 > 0)) throw ValidationError("lambda1 must be positive");
    if (!(lambda2 > 0)) throw ValidationError("lambda2 must be positive");
    if (!(column_fill > 0 && column_fill <= 1)) throw ValidationError("column_fill must be in (0, 1]");
    if (!(y_max - y_min >= 1)) throw ValidationError("position box must contain [0, 1]");
    if (max_group_binaries == 0) throw ValidationError("max_group_binaries must be positive");
    projection.check();
  }
  bool same_results(const LayoutConfig& o) const {
    return lambda1 == o.lambda1 && lambda2 == o.lambda2 && column_fill == o.column_fill &&
           max_group_binaries == o.max_group_binaries && projection == o.projection && y_min == o.y_min &&
           y_max == o.y_max && node_limit == o.node_limit;
  }
  friend bool operator==(const LayoutConfig& a, const LayoutConfig& b) { return a.same_results(b); }
};

struct RibbonRect {
  std::string object_id;
  int timestep = 0;
  double y_center = 0.0;
  double height = 0.0;
  double y_prime = 0.0;
  double bottom() const { return y_center - 0.5 * height; }
  double top() const { return y_center + 0.5 * height; }
  friend bool operator==(const RibbonRect&, const RibbonRect&) = default;
};

struct RibbonLink {
  std::string object_id;
  int from = 0;
  int to = 0;
  /// Objects whose link crosses this one spuriously.
  std::vector<std::string> spurious_crossings;
  bool spurious() const { return !spurious_crossings.empty(); }
  friend bool operator==(const RibbonLink&, const RibbonLink&) = default;
};

struct PairRecord {
  std::string i, j;
  double w = 0.0;        // scaled 2D intersection
  double overlap = 0.0;  // achieved 1D intersection I
  std::optional<double> k;  // A-pairs
  std::optional<int> c;     // B-pairs
  /// One rectangle contains the other, so the linear surrogate for I used
  /// in the constraints over-estimates it.
  bool containment = false;
  bool intersecting() const { return w > 0.0; }
  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct GroupRecord {
  std::vector<std::string> members;
  SolveStatus status = SolveStatus::optimal;
  /// False when the group was solved by relaxation and rounding, or the
  /// node limit was hit.
  bool optimal = true;
  std::size_t binaries = 0;
  std::size_t nodes = 0;
  std::optional<double> f1, f2;
  double f3 = 0.0;
  double objective = 0.0;
  friend bool operator==(const GroupRecord&, const GroupRecord&) = default;
};

struct TimeSliceSolution {
  int timestep = 0;
  std::vector<GroupRecord> groups;
  std::vector<PairRecord> pairs;  // within-group pairs only
  /// Pooled over the timestep: Σk / |A_t|, Σc / |B_t|, and total squared
  /// displacement after packing.
  std::optional<double> f1, f2;
  double f3 = 0.0;
  /// Mean of the per-group losses over groups where they are defined.
  std::optional<double> f1_group_mean, f2_group_mean;
  bool optimal = true;
  double runtime_seconds = 0.0;

  std::size_t spurious_count() const {
    std::size_t n = 0;
    for (const auto& p : pairs) n += p.c.value_or(0);
    return n;
  }
  std::size_t containment_count() const {
    return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.containment; }));
  }
  friend bool operator==(const TimeSliceSolution&, const TimeSliceSolution&) = default;
};

struct Layout {
  std::vector<std::string> object_ids;
  std::vector<int> timesteps;
  double area_scale = 0.0;
  LayoutConfig config;
  std::vector<RibbonRect> rects;
  std::vector<RibbonLink> links;
  std::vector<TimeSliceSolution> slices;
  std::map<std::string, double> projection_diagnostics;

  const RibbonRect* rect(const std::string& id, int t) const {
    for (const auto& r : rects)
      if (r.timestep == t && r.object_id == id) return &r;
    return nullptr;
  }
  const TimeSliceSolution* slice(int t) const {
    for (const auto& s : slices)
      if (s.timestep == t) return &s;
    return nullptr;
  }
  friend bool operator==(const Layout&, const Layout&) = default;
};

/// Vertical overlap of [y_a ± h_a/2] and [y_b ± h_b/2].
inline double interval_overlap(double ya, double ha, double yb, double hb) {
  const double lo = std::max(ya - 0.5 * ha, yb - 0.5 * hb);
  const double hi = std::min(ya + 0.5 * ha, yb + 0.5 * hb);
  return std::max(0.0, hi - lo);
}

// ---------------------------------------------------------------------------
// Area scaling

struct HeightScale {
  /// heights[object index][timestep]
  std::vector<std::map<int, double>> heights;
  double area_scale = 0.0;  // A_M
};

inline HeightScale scale_heights(const MovingRegionDataset& ds) {
  HeightScale out;
  std::map<int, double> totals;
  for (const auto& o : ds.objects)
    for (const auto& [t, obs] : o.observations) totals[t] += area(obs.polygon);
  for (const auto& [t, a] : totals) out.area_scale = std::max(out.area_scale, a);
  out.heights.resize(ds.objects.size());
  if (!(out.area_scale > 0)) return out;
  for (std::size_t i = 0; i < ds.objects.size(); ++i)
    for (const auto& [t, obs] : ds.objects[i].observations)
      out.heights[i][t] = area(obs.polygon) / out.area_scale;
  return out;
}

// ---------------------------------------------------------------------------
// Groups

/// Connected components of the graph with edges {w > 0}. Members are sorted
/// and groups ordered by their first member.
inline std::vector<std::vector<std::size_t>> partition_groups(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (w[a][b] > 0.0 || w[b][a] > 0.0) parent[std::max(find(a), find(b))] = std::min(find(a), find(b));
  std::map<std::size_t, std::vector<std::size_t>> comps;
  for (std::size_t a = 0; a < n; ++a) comps[find(a)].push_back(a);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : comps) out.push_back(std::move(members));
  return out;
}

/// One group's data in local indices.
struct GroupInput {
  std::vector<double> y_prime;
  std::vector<double> heights;
  std::vector<std::vector<double>> w;  // symmetric, scaled by A_M
};

struct GroupProblem {
  struct Pair {
    std::size_t a = 0, b = 0;
    double w = 0.0;
    std::optional<std::size_t> k_var;  // A-pairs
    std::size_t o_var = 0;             // 1: a above b
    std::optional<std::size_t> c_var;  // B-pairs
  };
  MiqpProblem problem;
  std::vector<Pair> pairs;
  std::size_t num_a = 0, num_b = 0;
  double big_m = 0.0;
};

/// Thrown when a group needs more binaries than allowed; the caller falls
/// back to relaxation and rounding.
class GroupTooLarge : public SolverError {
 public:
  GroupTooLarge(std::size_t binaries, std::size_t limit)
      : SolverError("group needs " + std::to_string(binaries) + " binaries, limit is " + std::to_string(limit)),
        binaries_(binaries),
        limit_(limit) {}
  std::size_t binaries() const { return binaries_; }
  std::size_t limit() const { return limit_; }

 private:
  std::size_t binaries_, limit_;
};

/// Variables: y (one per member), k (one per A-pair), then binaries o (one
/// per pair) and c (one per B-pair).
inline GroupProblem build_group_problem(const GroupInput& g, double lambda1, double lambda2,
                                        std::size_t max_binaries = 30, double y_min = -1.0, double y_max = 2.0) {
  const std::size_t n = g.y_prime.size();
  if (n < 2) throw ValidationError("group problem needs at least two objects");
  GroupProblem gp;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      GroupProblem::Pair p;
      p.a = a;
      p.b = b;
      p.w = g.w[a][b];
      (p.w > 0 ? gp.num_a : gp.num_b)++;
      gp.pairs.push_back(p);
    }
  const std::size_t binaries = gp.pairs.size() + gp.num_b;
  if (binaries > max_binaries) throw GroupTooLarge(binaries, max_binaries);

  auto& mp = gp.problem;
  mp.num_continuous = n + gp.num_a;
  mp.num_binary = binaries;
  const std::size_t total = mp.size();
  mp.Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mp.num_continuous), static_cast<Eigen::Index>(mp.num_continuous));
  mp.q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
  mp.bounds.assign(total, {0.0, 1.0});
  mp.names.resize(total);

  // F3 = Σ (y′ − y)² = ½ yᵀ(2I)y − 2y′ᵀy + Σ y′²
  for (std::size_t a = 0; a < n; ++a) {
    mp.Q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = 2.0;
    mp.q(static_cast<Eigen::Index>(a)) = -2.0 * g.y_prime[a];
    mp.constant += g.y_prime[a] * g.y_prime[a];
    mp.bounds[a] = {y_min, y_max};
    mp.names[a] = "y" + std::to_string(a);
  }
  gp.big_m = (y_max - y_min) + *std::max_element(g.heights.begin(), g.heights.end());
  const double M = gp.big_m;

  std::size_t next_k = n, next_bin = mp.num_continuous;
  for (auto& p : gp.pairs) {
    p.o_var = next_bin++;
    mp.names[p.o_var] = "o" + std::to_string(p.a) + "_" + std::to_string(p.b);
  }
  for (auto& p : gp.pairs) {
    const double H = 0.5 * (g.heights[p.a] + g.heights[p.b]);
    const std::size_t ya = p.a, yb = p.b, o = p.o_var;
    if (p.w > 0) {
      const std::size_t k = next_k++;
      p.k_var = k;
      mp.names[k] = "k" + std::to_string(p.a) + "_" + std::to_string(p.b);
      mp.bounds[k] = {1.0, std::max(1.0, H / p.w)};
      mp.q(static_cast<Eigen::Index>(k)) = lambda1 / static_cast<double>(gp.num_a);
      // |y_a − y_b| ≤ H − w
      mp.constraints.push_back({{{ya, 1.0}, {yb, -1.0}}, Relation::less_equal, H - p.w});
      mp.constraints.push_back({{{ya, -1.0}, {yb, 1.0}}, Relation::less_equal, H - p.w});
      // |y_a − y_b| ≥ H − k w, side chosen by o
      mp.constraints.push_back({{{ya, -1.0}, {yb, 1.0}, {k, -p.w}, {o, M}}, Relation::less_equal, M - H});
      mp.constraints.push_back({{{ya, 1.0}, {yb, -1.0}, {k, -p.w}, {o, -M}}, Relation::less_equal, -H});
    } else {
      const std::size_t c = next_bin++;
      p.c_var = c;
      mp.names[c] = "c" + std::to_string(p.a) + "_" + std::to_string(p.b);
      mp.q(static_cast<Eigen::Index>(c)) = lambda2 / static_cast<double>(gp.num_b);
      // |y_a − y_b| ≥ (1 − c) H, side chosen by o
      mp.constraints.push_back({{{ya, -1.0}, {yb, 1.0}, {c, -H}, {o, M}}, Relation::less_equal, M - H});
      mp.constraints.push_back({{{ya, 1.0}, {yb, -1.0}, {c, -H}, {o, -M}}, Relation::less_equal, -H});
    }
  }
  return gp;
}

struct GroupSolution {
  std::vector<double> y;
  std::vector<std::optional<double>> k;  // per pair, in GroupProblem order
  std::vector<std::optional<int>> c;
  SolveStatus status = SolveStatus::optimal;
  bool optimal = true;
  std::size_t binaries = 0;
  std::size_t nodes = 0;
  double objective = 0.0;
};

namespace detail {

inline MiqpSolution solve_with_binaries(const MiqpProblem& p, const std::vector<double>& binaries) {
  auto b = relaxed_bounds(p);
  for (std::size_t k = 0; k < p.num_binary; ++k) b[p.num_continuous + k].lo = b[p.num_continuous + k].hi = binaries[k];
  return solve_relaxation(p, b);
}

/// Binary assignment: ordering from `y`, c from `c_value` for every B-pair.
inline std::vector<double> ordered_binaries(const GroupProblem& gp, const std::vector<double>& y,
                                            const std::function<double(const GroupProblem::Pair&)>& c_value) {
  std::vector<double> bin(gp.problem.num_binary, 0.0);
  const auto off = gp.problem.num_continuous;
  for (const auto& p : gp.pairs) {
    bin[p.o_var - off] = y[p.a] >= y[p.b] ? 1.0 : 0.0;
    if (p.c_var) bin[*p.c_var - off] = c_value(p);
  }
  return bin;
}

inline GroupSolution unpack(const GroupProblem& gp, const MiqpSolution& s, std::size_t n) {
  GroupSolution out;
  out.y.assign(s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(n));
  for (const auto& p : gp.pairs) {
    out.k.push_back(p.k_var ? std::optional<double>(s.values[*p.k_var]) : std::nullopt);
    out.c.push_back(p.c_var ? std::optional<int>(s.values[*p.c_var] >= 0.5 ? 1 : 0) : std::nullopt);
  }
  out.status = s.status;
  out.nodes = s.nodes_explored;
  out.objective = s.objective_value;
  out.binaries = gp.problem.num_binary;
  return out;
}


/// Best solution found for a fixed vertical order of the members (rank[a]
/// greater means higher). Starts with every c = 1, which is feasible for any
/// order, then clears c on B-pairs that ended up separated until stable.
inline MiqpSolution solve_for_order(const GroupProblem& gp, const GroupInput& g, const std::vector<double>& rank) {
  const auto off = gp.problem.num_continuous;
  auto bin = ordered_binaries(gp, rank, [](const auto&) { return 1.0; });
  auto sol = solve_with_binaries(gp.problem, bin);
  for (std::size_t round = 0; round <= gp.num_b && sol.status != SolveStatus::infeasible; ++round) {
    bool changed = false;
    for (const auto& p : gp.pairs) {
      if (!p.c_var || bin[*p.c_var - off] == 0.0) continue;
      const double H = 0.5 * (g.heights[p.a] + g.heights[p.b]);
      if (std::abs(sol.values[p.a] - sol.values[p.b]) >= H - 1e-12) {
        bin[*p.c_var - off] = 0.0;
        changed = true;
      }
    }
    if (!changed) break;
    auto next = solve_with_binaries(gp.problem, bin);
    if (next.status == SolveStatus::infeasible) break;
    sol = std::move(next);
  }
  return sol;
}

inline std::vector<double> ranks_of(const std::vector<std::size_t>& bottom_to_top) {
  std::vector<double> rank(bottom_to_top.size());
  for (std::size_t r = 0; r < bottom_to_top.size(); ++r) rank[bottom_to_top[r]] = static_cast<double>(r);
  return rank;
}

inline std::vector<std::size_t> order_by(const std::vector<double>& y) {
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  return order;
}

}  // namespace detail

/// Solves one group exactly by branch-and-bound, or by relaxation and
/// rounding when it exceeds the binary budget.
inline GroupSolution solve_group(const GroupInput& g, const LayoutConfig& cfg) {
  const std::size_t n = g.y_prime.size();
  if (n == 1) {
    GroupSolution s;
    s.y = g.y_prime;
    return s;
  }
  std::optional<GroupProblem> gp;
  bool fallback = false;
  try {
    gp = build_group_problem(g, cfg.lambda1, cfg.lambda2, cfg.max_group_binaries, cfg.y_min, cfg.y_max);
  } catch (const GroupTooLarge&) {
    gp = build_group_problem(g, cfg.lambda1, cfg.lambda2, std::numeric_limits<std::size_t>::max(), cfg.y_min,
                             cfg.y_max);
    fallback = true;
  }
  const auto& mp = gp->problem;

  // Projection order with every c = 1 is always feasible (all y equal,
  // k at its upper bound), so the search never starts without an incumbent.
  const auto all_spurious = detail::ordered_binaries(*gp, g.y_prime, [](const auto&) { return 1.0; });
  auto best = detail::solve_with_binaries(mp, all_spurious);
  const auto none_spurious = detail::ordered_binaries(*gp, g.y_prime, [](const auto&) { return 0.0; });
  if (auto s = detail::solve_with_binaries(mp, none_spurious);
      s.status != SolveStatus::infeasible && (best.status == SolveStatus::infeasible || s.objective_value < best.objective_value))
    best = std::move(s);

  if (!fallback) {
    MiqpOptions opt;
    opt.node_limit = cfg.node_limit;
    if (best.status != SolveStatus::infeasible) opt.incumbent_hint = best.values;
    const auto sol = solve(mp, opt);
    if (sol.status == SolveStatus::infeasible) throw SolverError("group problem infeasible");
    auto out = detail::unpack(*gp, sol, n);
    out.optimal = sol.status == SolveStatus::optimal;
    return out;
  }

  auto consider = [&](MiqpSolution s) {
    if (s.status != SolveStatus::infeasible &&
        (best.status == SolveStatus::infeasible || s.objective_value < best.objective_value - 1e-12)) {
      best = std::move(s);
      return true;
    }
    return false;
  };
  // Relaxation with c rounded at 0.5 and the order read off the relaxed y.
  std::vector<std::vector<std::size_t>> orders{detail::order_by(g.y_prime)};
  const auto relaxed = solve_qp(mp);
  if (relaxed.status != SolveStatus::infeasible) {
    std::vector<double> ry(relaxed.values.begin(), relaxed.values.begin() + static_cast<std::ptrdiff_t>(n));
    const auto rounded =
        detail::ordered_binaries(*gp, ry, [&](const auto& p) { return relaxed.values[*p.c_var] >= 0.5 ? 1.0 : 0.0; });
    consider(detail::solve_with_binaries(mp, rounded));
    orders.push_back(detail::order_by(ry));
  }
  // Order-based candidates, then adjacent swaps while they help.
  std::vector<std::size_t> best_order = orders.front();
  double best_order_value = std::numeric_limits<double>::infinity();
  for (const auto& order : orders) {
    const auto s = detail::solve_for_order(*gp, g, detail::ranks_of(order));
    if (s.status != SolveStatus::infeasible && s.objective_value < best_order_value) {
      best_order_value = s.objective_value;
      best_order = order;
    }
    consider(s);
  }
  for (std::size_t pass = 0; pass < n; ++pass) {
    bool improved = false;
    for (std::size_t r = 0; r + 1 < n; ++r) {
      auto order = best_order;
      std::swap(order[r], order[r + 1]);
      auto s = detail::solve_for_order(*gp, g, detail::ranks_of(order));
      if (s.status != SolveStatus::infeasible && s.objective_value < best_order_value - 1e-12) {
        best_order_value = s.objective_value;
        best_order = std::move(order);
        consider(std::move(s));
        improved = true;
      }
    }
    if (!improved) break;
  }
  if (best.status == SolveStatus::infeasible) throw SolverError("group problem infeasible");
  auto out = detail::unpack(*gp, best, n);
  out.optimal = false;
  out.status = SolveStatus::iteration_limit;
  return out;
}

// ---------------------------------------------------------------------------
// Packing

struct GroupExtent {
  double lo = 0.0, hi = 0.0;  // interval covering all member rectangles
  std::string key;            // smallest member id, for ties
  double height() const { return hi - lo; }
  double mean() const { return lo + 0.5 * height(); }
};

/// Centres y_g minimizing Σ (y_g − ȳ_g)² with consecutive groups (ordered
/// by ȳ_g, then key) stacked without overlap. Returned in input order.
inline std::vector<double> pack_groups(const std::vector<GroupExtent>& groups) {
  const std::size_t m = groups.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (groups[a].mean() != groups[b].mean()) return groups[a].mean() < groups[b].mean();
    return groups[a].key < groups[b].key;
  });
  std::vector<double> centres(m);
  for (std::size_t g = 0; g < m; ++g) centres[g] = groups[g].mean();
  if (m < 2) return centres;

  bool separated = true;
  for (std::size_t r = 0; r + 1 < m; ++r) {
    const auto& a = groups[order[r]];
    const auto& b = groups[order[r + 1]];
    if (a.mean() + 0.5 * a.height() > b.mean() - 0.5 * b.height()) separated = false;
  }
  if (separated) return centres;

  qp::Problem p;
  const auto n = static_cast<Eigen::Index>(m);
  p.G = 2.0 * Eigen::MatrixXd::Identity(n, n);
  p.g.resize(n);
  for (std::size_t r = 0; r < m; ++r) p.g(static_cast<Eigen::Index>(r)) = -2.0 * groups[order[r]].mean();
  p.E.resize(0, n);
  p.e.resize(0);
  p.C = Eigen::MatrixXd::Zero(n - 1, n);
  p.c.resize(n - 1);
  for (Eigen::Index r = 0; r + 1 < n; ++r) {
    p.C(r, r) = -1.0;
    p.C(r, r + 1) = 1.0;
    p.c(r) = 0.5 * (groups[order[static_cast<std::size_t>(r)]].height() +
                    groups[order[static_cast<std::size_t>(r + 1)]].height());
  }
  const auto res = qp::solve(p);
  if (res.status != qp::Status::optimal) throw SolverError("group packing failed");
  for (std::size_t r = 0; r < m; ++r) centres[order[r]] = res.x(static_cast<Eigen::Index>(r));
  // Enforce exact non-overlap against rounding in the solve.
  for (std::size_t r = 1; r < m; ++r) {
    const auto& a = groups[order[r - 1]];
    const auto& b = groups[order[r]];
    const double need = centres[order[r - 1]] + 0.5 * (a.height() + b.height());
    if (centres[order[r]] < need) centres[order[r]] = need;
  }
  return centres;
}

// ---------------------------------------------------------------------------
// One timestep

/// Objects observed at one timestep, with their data.
struct TimestepInput {
  int timestep = 0;
  std::vector<std::string> ids;
  std::vector<double> y_prime;
  std::vector<double> heights;
  std::vector<std::vector<double>> w;  // scaled by A_M
};

struct TimestepResult {
  TimeSliceSolution slice;
  std::vector<double> y;  // final centres, aligned with TimestepInput::ids
};

inline TimestepResult optimize_timestep(const TimestepInput& in, const LayoutConfig& cfg) {
  TimestepResult out;
  auto& slice = out.slice;
  slice.timestep = in.timestep;
  const std::size_t n = in.ids.size();
  out.y = in.y_prime;
  if (n == 0) return out;

  const auto groups = partition_groups(in.w);
  std::vector<GroupExtent> extents;
  std::vector<std::vector<double>> group_y;
  double f1_sum = 0, f2_sum = 0, f1_groups = 0, f2_groups = 0;
  std::size_t num_a = 0, num_b = 0, groups_a = 0, groups_b = 0;
  for (const auto& members : groups) {
    GroupInput gi;
    for (auto a : members) {
      gi.y_prime.push_back(in.y_prime[a]);
      gi.heights.push_back(in.heights[a]);
    }
    gi.w.assign(members.size(), std::vector<double>(members.size(), 0.0));
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = 0; b < members.size(); ++b) gi.w[a][b] = in.w[members[a]][members[b]];

    GroupSolution gs;
    try {
      gs = solve_group(gi, cfg);
    } catch (const SolverError& e) {
      throw SolverError("timestep " + std::to_string(in.timestep) + ": " + e.what());
    }

    GroupRecord rec;
    for (auto a : members) rec.members.push_back(in.ids[a]);
    rec.status = gs.status;
    rec.optimal = gs.optimal;
    rec.binaries = gs.binaries;
    rec.nodes = gs.nodes;

    // Pair records; c follows the achieved overlap.
    double ksum = 0, csum = 0;
    std::size_t ga = 0, gb = 0, pi = 0;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b, ++pi) {
        PairRecord pr;
        pr.i = in.ids[members[a]];
        pr.j = in.ids[members[b]];
        pr.w = gi.w[a][b];
        pr.overlap = interval_overlap(gs.y[a], gi.heights[a], gs.y[b], gi.heights[b]);
        pr.containment = std::abs(gs.y[a] - gs.y[b]) < 0.5 * std::abs(gi.heights[a] - gi.heights[b]) - kOverlapEps;
        if (pr.w > 0) {
          pr.k = gs.k[pi];
          ksum += *pr.k;
          ++ga;
        } else {
          pr.c = pr.overlap > kOverlapEps ? 1 : 0;
          csum += *pr.c;
          ++gb;
        }
        slice.pairs.push_back(std::move(pr));
      }
    double f3 = 0;
    for (std::size_t a = 0; a < members.size(); ++a) f3 += (gi.y_prime[a] - gs.y[a]) * (gi.y_prime[a] - gs.y[a]);
    rec.f3 = f3;
    rec.objective = f3;
    if (ga) {
      rec.f1 = ksum / static_cast<double>(ga);
      rec.objective += cfg.lambda1 * *rec.f1;
      f1_groups += *rec.f1;
      ++groups_a;
    }
    if (gb) {
      rec.f2 = csum / static_cast<double>(gb);
      rec.objective += cfg.lambda2 * *rec.f2;
      f2_groups += *rec.f2;
      ++groups_b;
    }
    f1_sum += ksum;
    f2_sum += csum;
    num_a += ga;
    num_b += gb;
    slice.optimal = slice.optimal && gs.optimal;
    slice.groups.push_back(std::move(rec));

    GroupExtent ext{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                    *std::min_element(slice.groups.back().members.begin(), slice.groups.back().members.end())};
    for (std::size_t a = 0; a < members.size(); ++a) {
      ext.lo = std::min(ext.lo, gs.y[a] - 0.5 * gi.heights[a]);
      ext.hi = std::max(ext.hi, gs.y[a] + 0.5 * gi.heights[a]);
    }
    extents.push_back(ext);
    group_y.push_back(std::move(gs.y));
  }

  const auto centres = pack_groups(extents);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double shift = centres[g] - extents[g].mean();
    for (std::size_t a = 0; a < groups[g].size(); ++a) out.y[groups[g][a]] = group_y[g][a] + shift;
  }
  for (std::size_t a = 0; a < n; ++a) slice.f3 += (in.y_prime[a] - out.y[a]) * (in.y_prime[a] - out.y[a]);
  if (num_a) slice.f1 = f1_sum / static_cast<double>(num_a);
  if (num_b) slice.f2 = f2_sum / static_cast<double>(num_b);
  if (groups_a) slice.f1_group_mean = f1_groups / static_cast<double>(groups_a);
  if (groups_b) slice.f2_group_mean = f2_groups / static_cast<double>(groups_b);
  return out;
}

// ---------------------------------------------------------------------------
// Crossings

/// Marks links of different objects spanning the same pair of timesteps
/// that strictly swap order, when the objects intersect at neither end.
inline void flag_spurious_crossings(Layout& layout, const MovingRegionDataset& ds) {
  std::map<std::pair<std::string, int>, double> y;
  for (const auto& r : layout.rects) y[{r.object_id, r.timestep}] = r.y_center;
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_span;
  for (std::size_t l = 0; l < layout.links.size(); ++l) {
    layout.links[l].spurious_crossings.clear();
    by_span[{layout.links[l].from, layout.links[l].to}].push_back(l);
  }
  auto intersect = [&](const std::string& a, const std::string& b, int t) {
    const auto ia = ds.object_index(a), ib = ds.object_index(b);
    if (!ia || !ib) return false;
    const auto& oa = ds.objects[*ia].observations;
    const auto& ob = ds.objects[*ib].observations;
    const auto pa = oa.find(t), pb = ob.find(t);
    if (pa == oa.end() || pb == ob.end()) return false;
    return intersection_area(pa->second.polygon, pb->second.polygon) > 0.0;
  };
  for (const auto& [span, ls] : by_span)
    for (std::size_t x = 0; x < ls.size(); ++x)
      for (std::size_t z = x + 1; z < ls.size(); ++z) {
        auto& la = layout.links[ls[x]];
        auto& lb = layout.links[ls[z]];
        const double d0 = y[{la.object_id, span.first}] - y[{lb.object_id, span.first}];
        const double d1 = y[{la.object_id, span.second}] - y[{lb.object_id, span.second}];
        if (!(d0 * d1 < 0.0)) continue;
        if (intersect(la.object_id, lb.object_id, span.first) || intersect(la.object_id, lb.object_id, span.second))
          continue;
        la.spurious_crossings.push_back(lb.object_id);
        lb.spurious_crossings.push_back(la.object_id);
      }
  for (auto& l : layout.links) std::sort(l.spurious_crossings.begin(), l.spurious_crossings.end());
}

// ---------------------------------------------------------------------------
// Pipeline

inline unsigned resolve_jobs(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Objects observed at `t` with their y', heights and pairwise normalized
/// intersection areas.
inline TimestepInput make_timestep_input(const MovingRegionDataset& ds, const ProjectionResult& proj,
                                         const HeightScale& hs, int t) {
  TimestepInput in;
  in.timestep = t;
  std::vector<const ConvexPolygon*> polys;
  for (std::size_t i = 0; i < ds.objects.size(); ++i)
    if (const auto it = ds.objects[i].observations.find(t); it != ds.objects[i].observations.end()) {
      in.ids.push_back(ds.objects[i].id);
      in.y_prime.push_back(proj.at(i, t));
      in.heights.push_back(hs.heights[i].at(t));
      polys.push_back(&it->second.polygon);
    }
  const std::size_t n = polys.size();
  in.w.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) in.w[a][b] = in.w[b][a] = intersection_area(*polys[a], *polys[b]) / hs.area_scale;
  return in;
}

inline Layout compute_layout(const MovingRegionDataset& ds, const LayoutConfig& cfg = {}) {
  cfg.check();
  require_valid(ds);
  if (ds.observation_count() == 0) throw ValidationError("dataset has no observations to lay out");
  Layout layout;
  layout.config = cfg;
  layout.timesteps = ds.timesteps;
  for (const auto& o : ds.objects) layout.object_ids.push_back(o.id);

  const auto proj = project(ds, cfg.projection);
  layout.projection_diagnostics = proj.diagnostics;
  const auto hs = scale_heights(ds);
  layout.area_scale = hs.area_scale;

  const std::size_t T = ds.timesteps.size();
  std::vector<TimestepInput> inputs(T);
  std::vector<TimestepResult> results(T);
  std::vector<std::string> errors(T);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < T; k = next++) {
      const auto start = std::chrono::steady_clock::now();
      try {
        auto& in = inputs[k] = make_timestep_input(ds, proj, hs, ds.timesteps[k]);
        results[k] = optimize_timestep(in, cfg);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
      results[k].slice.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const unsigned jobs = std::min<unsigned>(resolve_jobs(cfg.jobs), static_cast<unsigned>(std::max<std::size_t>(T, 1)));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::string failed;
  for (std::size_t k = 0; k < T; ++k)
    if (!errors[k].empty()) failed += (failed.empty() ? "" : "; ") + errors[k];
  if (!failed.empty()) throw SolverError("layout failed: " + failed);

  for (std::size_t k = 0; k < T; ++k) {
    const auto& in = inputs[k];
    for (std::size_t a = 0; a < in.ids.size(); ++a)
      layout.rects.push_back({in.ids[a], in.timestep, results[k].y[a], in.heights[a], in.y_prime[a]});
    layout.slices.push_back(std::move(results[k].slice));
  }
  for (const auto& o : ds.objects) {
    const int* prev = nullptr;
    for (const auto& [t, obs] : o.observations) {
      if (prev) layout.links.push_back({o.id, *prev, t, {}});
      prev = &t;
    }
  }
  flag_spurious_crossings(layout, ds);
  return layout;
}

}  // namespace morevis
