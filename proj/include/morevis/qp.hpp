#pragma once

// Dense convex quadratic programming for small problems.
//
//   minimize   ½ xᵀ G x + gᵀ x
//   subject to E x  = e
//              C x >= c
//
// Strictly convex problems are solved by the Goldfarb-Idnani dual
// active-set method. Merely semidefinite G is handled by proximal-point
// iterations x_{k+1} = argmin f(x) + ρ/2 ‖x − x_k‖², each of which is
// strictly convex; on polyhedral problems these terminate after a few
// outer steps.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace morevis::qp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Status { optimal, infeasible, iteration_limit };

struct Problem {
  MatrixXd G;
  VectorXd g;
  MatrixXd E;  // equality rows
  VectorXd e;
  MatrixXd C;  // inequality rows, C x >= c
  VectorXd c;

  Eigen::Index size() const { return G.rows(); }
  double objective(const VectorXd& x) const { return 0.5 * x.dot(G * x) + g.dot(x); }
};

struct Result {
  Status status = Status::infeasible;
  VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Goldfarb-Idnani for positive definite G. The Cholesky factor is kept so
/// that repeated solves with different linear terms reuse it.
class DualActiveSet {
 public:
  explicit DualActiveSet(const MatrixXd& G) : n_(G.rows()) {
    Eigen::LLT<MatrixXd> llt(G);
    ok_ = llt.info() == Eigen::Success;
    if (ok_) {
      const MatrixXd L = llt.matrixL();
      // J = L^{-T}, so that J Jᵀ = G^{-1}.
      J0_ = L.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(n_, n_));
    }
  }

  bool factorized() const { return ok_; }

  Result solve(const VectorXd& g, const MatrixXd& E, const VectorXd& e, const MatrixXd& C, const VectorXd& c,
               int max_iterations = 0) const {
    Result res;
    const Eigen::Index me = E.rows(), mi = C.rows();
    if (max_iterations <= 0) max_iterations = static_cast<int>(20 * (n_ + me + mi) + 100);
    J_ = J0_;
    R_.setZero(n_, n_);
    q_ = 0;
    active_.assign(static_cast<std::size_t>(n_), -1);
    u_.setZero(n_);
    VectorXd x = -(J_ * (J_.transpose() * g));
    std::vector<char> is_active(static_cast<std::size_t>(mi), 0);

    // Equalities: always added with a full step.
    for (Eigen::Index k = 0; k < me; ++k) {
      const VectorXd np = E.row(k).transpose();
      VectorXd d = J_.transpose() * np;
      const VectorXd z = J_.rightCols(n_ - q_) * d.tail(n_ - q_);
      const VectorXd r = solve_r(d);
      const double resid = e(k) - np.dot(x);
      const double tail_norm = d.tail(n_ - q_).norm();
      if (tail_norm <= kDependent * std::max(1.0, d.norm())) {
        if (std::abs(resid) > feas_tol(e(k), np)) return res;  // inconsistent equalities
        continue;                                                 // redundant
      }
      const double t = resid / z.dot(np);
      x += t * z;
      u_.head(q_) -= t * r;
      u_(q_) = t;
      add_column(d);
      active_[static_cast<std::size_t>(q_ - 1)] = static_cast<int>(k);
    }

    int iter = 0;
    while (true) {
      if (++iter > max_iterations) {
        res.status = Status::iteration_limit;
        res.x = x;
        res.iterations = iter;
        return res;
      }
      // Most violated inequality, scaled by row norm.
      Eigen::Index p = -1;
      double worst = 0.0;
      for (Eigen::Index i = 0; i < mi; ++i) {
        if (is_active[static_cast<std::size_t>(i)]) continue;
        const double rn = std::max(1.0, C.row(i).norm());
        const double s = (C.row(i).dot(x) - c(i)) / rn;
        if (s < -kViolation * std::max(1.0, std::abs(c(i)) / rn) && s < worst) {
          worst = s;
          p = i;
        }
      }
      if (p < 0) break;

      const VectorXd np = C.row(p).transpose();
      double up = 0.0;
      double sp = np.dot(x) - c(p);
      while (true) {
        if (++iter > max_iterations) {
          res.status = Status::iteration_limit;
          res.x = x;
          res.iterations = iter;
          return res;
        }
        VectorXd d = J_.transpose() * np;
        const VectorXd r = solve_r(d);
        const double tail_norm = d.tail(n_ - q_).norm();
        const bool has_primal = tail_norm > kDependent * std::max(1.0, d.norm());
        VectorXd z;
        double t2 = std::numeric_limits<double>::infinity();
        if (has_primal) {
          z = J_.rightCols(n_ - q_) * d.tail(n_ - q_);
          t2 = -sp / z.dot(np);
        }
        double t1 = std::numeric_limits<double>::infinity();
        Eigen::Index l = -1;
        for (Eigen::Index j = 0; j < q_; ++j) {
          if (active_[static_cast<std::size_t>(j)] < static_cast<int>(me)) continue;
          if (r(j) > kDependent) {
            const double ratio = u_(j) / r(j);
            if (ratio < t1) {
              t1 = ratio;
              l = j;
            }
          }
        }
        if (!std::isfinite(t1) && !std::isfinite(t2)) {
          res.status = Status::infeasible;
          res.iterations = iter;
          return res;
        }
        if (!has_primal) {
          // Dual step only.
          u_.head(q_) -= t1 * r;
          up += t1;
          drop(l, is_active, static_cast<int>(me));
          continue;
        }
        const double t = std::min(t1, t2);
        x += t * z;
        u_.head(q_) -= t * r;
        up += t;
        if (t2 <= t1) {
          add_column(d);
          active_[static_cast<std::size_t>(q_ - 1)] = static_cast<int>(me + p);
          u_(q_ - 1) = up;
          is_active[static_cast<std::size_t>(p)] = 1;
          break;
        }
        drop(l, is_active, static_cast<int>(me));
        sp = np.dot(x) - c(p);
        if (sp >= 0.0) break;
      }
    }
    res.status = Status::optimal;
    res.x = std::move(x);
    res.iterations = iter;
    return res;
  }

 private:
  static constexpr double kDependent = 1e-12;
  static constexpr double kViolation = 1e-12;

  static double feas_tol(double rhs, const VectorXd& row) {
    return 1e-10 * std::max({1.0, std::abs(rhs), row.norm()});
  }

  VectorXd solve_r(const VectorXd& d) const {
    VectorXd r(q_);
    for (Eigen::Index i = q_ - 1; i >= 0; --i) {
      double s = d(i);
      for (Eigen::Index k = i + 1; k < q_; ++k) s -= R_(i, k) * r(k);
      r(i) = s / R_(i, i);
    }
    return r;
  }

  // Rotate columns a, b of J by (cs, sn).
  void rotate_j(Eigen::Index a, Eigen::Index b, double cs, double sn) const {
    for (Eigen::Index k = 0; k < n_; ++k) {
      const double ja = J_(k, a), jb = J_(k, b);
      J_(k, a) = cs * ja + sn * jb;
      J_(k, b) = -sn * ja + cs * jb;
    }
  }

  void add_column(VectorXd& d) const {
    for (Eigen::Index j = n_ - 1; j > q_; --j) {
      const double h = std::hypot(d(j - 1), d(j));
      if (h == 0.0) continue;
      const double cs = d(j - 1) / h, sn = d(j) / h;
      d(j - 1) = h;
      d(j) = 0.0;
      rotate_j(j - 1, j, cs, sn);
    }
    R_.col(q_).head(q_ + 1) = d.head(q_ + 1);
    ++q_;
  }

  void drop(Eigen::Index l, std::vector<char>& is_active, int me) const {
    const int id = active_[static_cast<std::size_t>(l)];
    if (id >= me) is_active[static_cast<std::size_t>(id - me)] = 0;
    for (Eigen::Index j = l; j < q_ - 1; ++j) {
      R_.col(j).head(q_) = R_.col(j + 1).head(q_);
      active_[static_cast<std::size_t>(j)] = active_[static_cast<std::size_t>(j + 1)];
      u_(j) = u_(j + 1);
    }
    R_.col(q_ - 1).setZero();
    active_[static_cast<std::size_t>(q_ - 1)] = -1;
    u_(q_ - 1) = 0.0;
    --q_;
    for (Eigen::Index j = l; j < q_; ++j) {
      const double a = R_(j, j), b = R_(j + 1, j);
      const double h = std::hypot(a, b);
      if (h == 0.0) continue;
      const double cs = a / h, sn = b / h;
      for (Eigen::Index k = j; k < q_; ++k) {
        const double ra = R_(j, k), rb = R_(j + 1, k);
        R_(j, k) = cs * ra + sn * rb;
        R_(j + 1, k) = -sn * ra + cs * rb;
      }
      R_(j + 1, j) = 0.0;
      rotate_j(j, j + 1, cs, sn);
    }
  }

  Eigen::Index n_;
  bool ok_ = false;
  MatrixXd J0_;
  mutable MatrixXd J_, R_;
  mutable Eigen::Index q_ = 0;
  mutable std::vector<int> active_;
  mutable VectorXd u_;
};

struct Options {
  /// Outer proximal iterations for semidefinite problems.
  int max_prox_iterations = 200;
  double prox_tolerance = 1e-12;
};

/// Solves a convex (G ⪰ 0) problem. Infeasibility is reported from the
/// first subproblem; the feasible set is shared by every outer iteration.
inline Result solve(const Problem& prob, const Options& opt = {}) {
  const Eigen::Index n = prob.size();
  Result res;
  if (n == 0) {
    // Only constant constraints remain.
    for (Eigen::Index i = 0; i < prob.e.size(); ++i)
      if (std::abs(prob.e(i)) > 1e-10) return res;
    for (Eigen::Index i = 0; i < prob.c.size(); ++i)
      if (prob.c(i) > 1e-10) return res;
    res.status = Status::optimal;
    res.x = VectorXd(0);
    res.objective = 0.0;
    return res;
  }
  const double scale = std::max(1.0, prob.G.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(prob.G, Eigen::EigenvaluesOnly);
  const bool strictly_convex = eig.eigenvalues().minCoeff() > 1e-6 * scale;

  if (strictly_convex) {
    DualActiveSet solver(prob.G);
    res = solver.solve(prob.g, prob.E, prob.e, prob.C, prob.c);
    if (res.status != Status::infeasible) res.objective = prob.objective(res.x);
    return res;
  }

  // Diagonal proximal weights grow with the linear cost so that the first
  // unconstrained step stays O(1/ρ) even for steep linear terms.
  VectorXd rho(n);
  for (Eigen::Index i = 0; i < n; ++i) rho(i) = 1e-4 * scale * std::max(1.0, std::abs(prob.g(i)));
  DualActiveSet solver(MatrixXd(prob.G + MatrixXd(rho.asDiagonal())));
  VectorXd center = VectorXd::Zero(n);
  int total = 0;
  for (int k = 0; k < opt.max_prox_iterations; ++k) {
    Result step = solver.solve(prob.g - rho.cwiseProduct(center), prob.E, prob.e, prob.C, prob.c);
    total += step.iterations;
    if (step.status != Status::optimal) {
      step.iterations = total;
      if (step.status == Status::iteration_limit) step.objective = prob.objective(step.x);
      return step;
    }
    bool settled = true;
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(step.x(i) - center(i)) > opt.prox_tolerance * (1.0 + std::abs(step.x(i)))) settled = false;
    center = step.x;
    if (settled) {
      res.status = Status::optimal;
      res.x = center;
      res.objective = prob.objective(center);
      res.iterations = total;
      return res;
    }
  }
  res.status = Status::iteration_limit;
  res.x = center;
  res.objective = prob.objective(center);
  res.iterations = total;
  return res;
}

}  // namespace morevis::qp
