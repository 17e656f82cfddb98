#pragma once

// Small mixed-integer convex quadratic programs: best-first
// branch-and-bound over binary variables on top of qp::solve, plus an
// exhaustive enumeration oracle.

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "morevis/error.hpp"
#include "morevis/qp.hpp"

namespace morevis {

enum class Relation { less_equal, equal };

struct LinearConstraint {
  std::vector<std::pair<std::size_t, double>> terms;  // (variable, coefficient)
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

struct VariableBounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Variables [0, num_continuous) are continuous, the remaining
/// num_binary are binary. The objective is
///   ½ x_cᵀ Q x_c + qᵀ x + constant
/// where x_c are the continuous variables.
struct MiqpProblem {
  std::size_t num_continuous = 0;
  std::size_t num_binary = 0;
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double constant = 0.0;
  std::vector<LinearConstraint> constraints;
  std::vector<VariableBounds> bounds;
  /// Optional variable names for diagnostics.
  std::vector<std::string> names;

  std::size_t size() const { return num_continuous + num_binary; }
  bool is_binary(std::size_t v) const { return v >= num_continuous; }

  double objective(const std::vector<double>& x) const {
    double f = constant;
    for (std::size_t i = 0; i < size(); ++i) f += q(static_cast<Eigen::Index>(i)) * x[i];
    for (std::size_t i = 0; i < num_continuous; ++i)
      for (std::size_t j = 0; j < num_continuous; ++j)
        f += 0.5 * Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[i] * x[j];
    return f;
  }

  /// Largest constraint or bound violation at x.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& c : constraints) {
      double lhs = 0.0;
      for (const auto& [v, a] : c.terms) lhs += a * x[v];
      const double viol = c.relation == Relation::equal ? std::abs(lhs - c.rhs) : lhs - c.rhs;
      worst = std::max(worst, viol);
    }
    for (std::size_t i = 0; i < size(); ++i) worst = std::max({worst, bounds[i].lo - x[i], x[i] - bounds[i].hi});
    return worst;
  }

  /// Throws ValidationError on malformed problems: dimension mismatch,
  /// out-of-range variable references, binaries not within [0, 1], or Q
  /// with an eigenvalue below −1e-8.
  void check() const {
    const auto n = static_cast<Eigen::Index>(size());
    if (Q.rows() != static_cast<Eigen::Index>(num_continuous) || Q.cols() != Q.rows())
      throw ValidationError("miqp: Q must be num_continuous square");
    if (q.size() != n) throw ValidationError("miqp: q must cover every variable");
    if (bounds.size() != size()) throw ValidationError("miqp: bounds must cover every variable");
    for (const auto& c : constraints)
      for (const auto& [v, a] : c.terms)
        if (v >= size()) throw ValidationError("miqp: constraint references unknown variable");
    for (std::size_t i = num_continuous; i < size(); ++i)
      if (bounds[i].lo < 0.0 || bounds[i].hi > 1.0) throw ValidationError("miqp: binary bounds must lie in [0, 1]");
    if (num_continuous > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-8) throw ValidationError("miqp: Q is not positive semidefinite");
    }
  }
};

enum class SolveStatus { optimal, infeasible, iteration_limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration-limit";
  }
  return "?";
}

struct MiqpSolution {
  std::vector<double> values;
  double objective_value = std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::infeasible;
  std::size_t nodes_explored = 0;
  /// Objective of the root relaxation (a lower bound).
  double root_bound = -std::numeric_limits<double>::infinity();
};

struct MiqpOptions {
  std::size_t node_limit = 200000;
  double absolute_gap = 1e-9;
  double relative_gap = 1e-9;
  /// Values used to seed the incumbent: binaries are fixed to the rounded
  /// hint and the remaining QP is solved.
  std::optional<std::vector<double>> incumbent_hint;
};

namespace detail {

/// Solves the continuous relaxation under `bounds` after substituting out
/// every fixed variable.
inline MiqpSolution solve_relaxation(const MiqpProblem& p, const std::vector<VariableBounds>& bounds) {
  MiqpSolution sol;
  const std::size_t n = p.size();
  std::vector<Eigen::Index> free_index(n, -1);
  std::vector<double> fixed(n, 0.0);
  Eigen::Index nf = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (bounds[i].lo > bounds[i].hi + 1e-12) return sol;
    if (bounds[i].hi - bounds[i].lo <= 1e-12) fixed[i] = bounds[i].lo;
    else free_index[i] = nf++;
  }
  std::vector<std::size_t> free_vars;
  for (std::size_t i = 0; i < n; ++i)
    if (free_index[i] >= 0) free_vars.push_back(i);

  qp::Problem qp;
  qp.G = Eigen::MatrixXd::Zero(nf, nf);
  qp.g = Eigen::VectorXd::Zero(nf);
  const auto nc = p.num_continuous;
  for (std::size_t a = 0; a < free_vars.size(); ++a) {
    const std::size_t i = free_vars[a];
    qp.g(static_cast<Eigen::Index>(a)) = p.q(static_cast<Eigen::Index>(i));
    if (i >= nc) continue;
    for (std::size_t b = 0; b < free_vars.size(); ++b)
      if (free_vars[b] < nc)
        qp.G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            0.5 * (p.Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(free_vars[b])) +
                   p.Q(static_cast<Eigen::Index>(free_vars[b]), static_cast<Eigen::Index>(i)));
    for (std::size_t j = 0; j < nc; ++j)
      if (free_index[j] < 0)
        qp.g(static_cast<Eigen::Index>(a)) +=
            0.5 * (p.Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                   p.Q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) * fixed[j];
  }

  std::vector<Eigen::VectorXd> eq_rows, in_rows;
  std::vector<double> eq_rhs, in_rhs;
  for (const auto& c : p.constraints) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(nf);
    double rhs = c.rhs;
    for (const auto& [v, a] : c.terms) {
      if (free_index[v] >= 0) row(free_index[v]) += a;
      else rhs -= a * fixed[v];
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(c.rhs));
    if (row.lpNorm<Eigen::Infinity>() == 0.0) {
      if (c.relation == Relation::equal ? std::abs(rhs) > tol : rhs < -tol) return sol;
      continue;
    }
    if (c.relation == Relation::equal) {
      eq_rows.push_back(row);
      eq_rhs.push_back(rhs);
    } else {
      in_rows.push_back(-row);
      in_rhs.push_back(-rhs);
    }
  }
  for (std::size_t a = 0; a < free_vars.size(); ++a) {
    const auto& b = bounds[free_vars[a]];
    if (std::isfinite(b.lo)) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(nf);
      row(static_cast<Eigen::Index>(a)) = 1.0;
      in_rows.push_back(row);
      in_rhs.push_back(b.lo);
    }
    if (std::isfinite(b.hi)) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(nf);
      row(static_cast<Eigen::Index>(a)) = -1.0;
      in_rows.push_back(row);
      in_rhs.push_back(-b.hi);
    }
  }
  auto stack = [nf](const std::vector<Eigen::VectorXd>& rows, const std::vector<double>& rhs, Eigen::MatrixXd& M,
                    Eigen::VectorXd& v) {
    M.resize(static_cast<Eigen::Index>(rows.size()), nf);
    v.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      M.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
      v(static_cast<Eigen::Index>(r)) = rhs[r];
    }
  };
  stack(eq_rows, eq_rhs, qp.E, qp.e);
  stack(in_rows, in_rhs, qp.C, qp.c);

  const auto res = qp::solve(qp);
  if (res.status == qp::Status::infeasible) return sol;
  sol.values = fixed;
  for (std::size_t a = 0; a < free_vars.size(); ++a) {
    // Clamp rounding noise back inside the box.
    const auto& b = bounds[free_vars[a]];
    sol.values[free_vars[a]] = std::clamp(res.x(static_cast<Eigen::Index>(a)), b.lo, b.hi);
  }
  sol.objective_value = p.objective(sol.values);
  sol.status = res.status == qp::Status::optimal ? SolveStatus::optimal : SolveStatus::iteration_limit;
  sol.nodes_explored = 1;
  return sol;
}

inline std::vector<VariableBounds> relaxed_bounds(const MiqpProblem& p) {
  auto b = p.bounds;
  for (std::size_t i = p.num_continuous; i < p.size(); ++i) {
    b[i].lo = std::max(b[i].lo, 0.0);
    b[i].hi = std::min(b[i].hi, 1.0);
  }
  return b;
}

}  // namespace detail

/// Continuous relaxation: binaries are treated as continuous on [0, 1].
inline MiqpSolution solve_qp(const MiqpProblem& p) {
  p.check();
  auto sol = detail::solve_relaxation(p, detail::relaxed_bounds(p));
  sol.root_bound = sol.objective_value;
  return sol;
}

/// Global optimum by enumerating all 2^num_binary assignments.
inline MiqpSolution brute_force_solve(const MiqpProblem& p) {
  p.check();
  if (p.num_binary > 16) throw ValidationError("brute_force_solve: at most 16 binaries supported");
  MiqpSolution best;
  const auto base = detail::relaxed_bounds(p);
  const std::uint32_t combos = 1u << p.num_binary;
  for (std::uint32_t mask = 0; mask < combos; ++mask) {
    auto b = base;
    bool possible = true;
    for (std::size_t k = 0; k < p.num_binary; ++k) {
      const double v = (mask >> k) & 1u ? 1.0 : 0.0;
      auto& vb = b[p.num_continuous + k];
      if (v < vb.lo - 1e-12 || v > vb.hi + 1e-12) possible = false;
      vb.lo = vb.hi = v;
    }
    if (!possible) continue;
    auto sol = detail::solve_relaxation(p, b);
    ++best.nodes_explored;
    if (sol.status == SolveStatus::infeasible) continue;
    if (sol.objective_value < best.objective_value - 1e-12 || best.status == SolveStatus::infeasible) {
      const auto explored = best.nodes_explored;
      best = std::move(sol);
      best.nodes_explored = explored;
    }
  }
  return best;
}

/// Best-first branch-and-bound on the most fractional binary. Nodes whose
/// relaxation bound is within the gap of the incumbent are pruned. When the
/// node limit is hit the best incumbent is returned with status
/// iteration_limit.
inline MiqpSolution solve(const MiqpProblem& p, const MiqpOptions& opt = {}) {
  p.check();
  const auto root_bounds = detail::relaxed_bounds(p);
  auto root = detail::solve_relaxation(p, root_bounds);
  MiqpSolution result;
  result.nodes_explored = 1;
  if (root.status == SolveStatus::infeasible) return result;
  result.root_bound = root.objective_value;
  if (p.num_binary == 0) {
    root.root_bound = root.objective_value;
    return root;
  }

  MiqpSolution incumbent;
  auto gap = [&](double inc) { return opt.absolute_gap + opt.relative_gap * std::abs(inc); };
  auto try_fixed = [&](const std::vector<double>& x, const std::vector<VariableBounds>& under) {
    auto b = under;
    for (std::size_t i = p.num_continuous; i < p.size(); ++i) {
      const double v = x[i] >= 0.5 ? 1.0 : 0.0;
      if (v < b[i].lo - 1e-12 || v > b[i].hi + 1e-12) return;
      b[i].lo = b[i].hi = v;
    }
    auto sol = detail::solve_relaxation(p, b);
    if (sol.status == SolveStatus::infeasible) return;
    if (incumbent.status == SolveStatus::infeasible || sol.objective_value < incumbent.objective_value - 1e-12)
      incumbent = std::move(sol);
  };
  if (opt.incumbent_hint && opt.incumbent_hint->size() == p.size()) try_fixed(*opt.incumbent_hint, root_bounds);
  try_fixed(root.values, root_bounds);

  struct Node {
    double bound;
    std::uint64_t id;
    std::vector<VariableBounds> bounds;
    std::vector<double> x;
  };
  auto worse = [](const Node& a, const Node& b) { return a.bound > b.bound || (a.bound == b.bound && a.id > b.id); };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  std::uint64_t next_id = 0;
  open.push({root.objective_value, next_id++, root_bounds, root.values});
  std::size_t explored = 1;
  bool hit_limit = false;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (incumbent.status != SolveStatus::infeasible && node.bound >= incumbent.objective_value - gap(incumbent.objective_value))
      break;  // best-first: every remaining node is at least as bad
    // Most fractional binary, lowest index on ties.
    std::size_t branch = p.size();
    double best_frac = 1e-9;
    for (std::size_t i = p.num_continuous; i < p.size(); ++i) {
      const double f = std::min(node.x[i] - std::floor(node.x[i]), std::ceil(node.x[i]) - node.x[i]);
      if (f > best_frac + 1e-12) {
        best_frac = f;
        branch = i;
      }
    }
    if (branch == p.size()) {
      try_fixed(node.x, node.bounds);
      continue;
    }
    for (const double v : {0.0, 1.0}) {
      if (explored >= opt.node_limit) {
        hit_limit = true;
        break;
      }
      auto b = node.bounds;
      b[branch].lo = b[branch].hi = v;
      auto child = detail::solve_relaxation(p, b);
      ++explored;
      if (child.status == SolveStatus::infeasible) continue;
      if (incumbent.status != SolveStatus::infeasible &&
          child.objective_value >= incumbent.objective_value - gap(incumbent.objective_value))
        continue;
      open.push({child.objective_value, next_id++, std::move(b), std::move(child.values)});
    }
    if (hit_limit) break;
  }

  if (incumbent.status == SolveStatus::infeasible) {
    result.nodes_explored = explored;
    result.status = hit_limit ? SolveStatus::iteration_limit : SolveStatus::infeasible;
    return result;
  }
  incumbent.root_bound = result.root_bound;
  incumbent.nodes_explored = explored;
  if (hit_limit) incumbent.status = SolveStatus::iteration_limit;
  for (std::size_t i = p.num_continuous; i < p.size(); ++i) incumbent.values[i] = incumbent.values[i] >= 0.5 ? 1.0 : 0.0;
  return incumbent;
}

}  // namespace morevis
