#include "morevis/miqp.hpp"

#include <gtest/gtest.h>

#include "morevis/random.hpp"

namespace morevis {
namespace {

TEST(Miqp, NoBinariesMatchesSolveQp) {
  MiqpProblem p;
  p.num_continuous = 2;
  p.Q = 2 * Eigen::MatrixXd::Identity(2, 2);
  p.q = Eigen::Vector2d(-2, -4);
  p.bounds.assign(2, {-5, 5});
  p.constraints.push_back({{{0, 1.0}, {1, 1.0}}, Relation::less_equal, 1.0});
  const auto a = solve(p), b = solve_qp(p);
  ASSERT_EQ(a.status, SolveStatus::optimal);
  EXPECT_NEAR(a.objective_value, b.objective_value, 1e-12);
  EXPECT_NEAR(a.values[0], b.values[0], 1e-12);
}

TEST(Miqp, SingleBinaryOpensTheBox) {
  // min (x − 0.6)² s.t. x ≤ b, x ≥ 0.
  MiqpProblem p;
  p.num_continuous = 1;
  p.num_binary = 1;
  p.Q = Eigen::MatrixXd::Constant(1, 1, 2.0);
  p.q = Eigen::Vector2d(-1.2, 0);
  p.constant = 0.36;
  p.bounds = {{0, std::numeric_limits<double>::infinity()}, {0, 1}};
  p.constraints.push_back({{{0, 1.0}, {1, -1.0}}, Relation::less_equal, 0.0});
  for (const auto& s : {solve(p), brute_force_solve(p)}) {
    ASSERT_EQ(s.status, SolveStatus::optimal);
    EXPECT_EQ(s.values[1], 1.0);
    EXPECT_NEAR(s.values[0], 0.6, 1e-12);
    EXPECT_NEAR(s.objective_value, 0.0, 1e-12);
  }
}

TEST(Miqp, InfeasibleEverywhere) {
  MiqpProblem p;
  p.num_continuous = 1;
  p.num_binary = 1;
  p.Q = Eigen::MatrixXd::Constant(1, 1, 2.0);
  p.q = Eigen::Vector2d::Zero();
  p.bounds = {{0, 1}, {0, 1}};
  p.constraints.push_back({{{0, 1.0}, {1, 1.0}}, Relation::less_equal, -1.0});
  EXPECT_EQ(solve(p).status, SolveStatus::infeasible);
  EXPECT_EQ(brute_force_solve(p).status, SolveStatus::infeasible);
}

TEST(Miqp, BruteForceSizeLimit) {
  MiqpProblem p;
  p.num_binary = 17;
  p.Q = Eigen::MatrixXd(0, 0);
  p.q = Eigen::VectorXd::Zero(17);
  p.bounds.assign(17, {0, 1});
  EXPECT_THROW(brute_force_solve(p), ValidationError);
}

// Random disjunctive problems in the shape the layout produces: positions
// with a quadratic pull, pairwise separation disjunctions via big-M.
MiqpProblem random_problem(Rng& rng) {
  MiqpProblem p;
  const auto nc = static_cast<std::size_t>(rng.integer(1, 4));
  const auto nb = static_cast<std::size_t>(rng.integer(1, 6));
  p.num_continuous = nc;
  p.num_binary = nb;
  const auto n = static_cast<Eigen::Index>(nc + nb);
  Eigen::MatrixXd M(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nc));
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = rng.uniform(-1, 1);
  p.Q = M.transpose() * M;
  if (rng.uniform() < 0.7) p.Q += 0.5 * Eigen::MatrixXd::Identity(M.rows(), M.cols());
  p.q = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) p.q(i) = rng.uniform(-1, 1);
  p.bounds.assign(nc + nb, {0, 1});
  for (std::size_t i = 0; i < nc; ++i) p.bounds[i] = {-2, 2};
  const int rows = static_cast<int>(rng.integer(1, 6));
  for (int r = 0; r < rows; ++r) {
    LinearConstraint c;
    for (std::size_t i = 0; i < nc + nb; ++i)
      if (rng.uniform() < 0.6) c.terms.push_back({i, rng.uniform(-3, 3)});
    c.rhs = rng.uniform(-1, 2);
    c.relation = rng.uniform() < 0.1 ? Relation::equal : Relation::less_equal;
    p.constraints.push_back(c);
  }
  return p;
}

TEST(Miqp, BranchAndBoundMatchesEnumeration) {
  Rng rng(2024);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_problem(rng);
    const auto bb = solve(p);
    const auto bf = brute_force_solve(p);
    ASSERT_EQ(bb.status == SolveStatus::infeasible, bf.status == SolveStatus::infeasible) << trial;
    if (bf.status == SolveStatus::infeasible) continue;
    ++feasible;
    ASSERT_EQ(bb.status, SolveStatus::optimal);
    EXPECT_NEAR(bb.objective_value, bf.objective_value, 1e-6) << trial;
    EXPECT_LE(bb.root_bound, bb.objective_value + 1e-9);
    EXPECT_LE(p.max_violation(bb.values), 1e-8);
    for (std::size_t i = p.num_continuous; i < p.size(); ++i)
      EXPECT_TRUE(bb.values[i] == 0.0 || bb.values[i] == 1.0);
  }
  EXPECT_GT(feasible, 100);
}

TEST(Miqp, NodeLimitReturnsIncumbent) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_problem(rng);
    MiqpOptions opt;
    opt.node_limit = 2;
    const auto s = solve(p, opt);
    if (s.status == SolveStatus::infeasible) continue;
    EXPECT_LE(s.nodes_explored, 2u);
    if (s.status == SolveStatus::iteration_limit && !s.values.empty()) {
      EXPECT_LE(p.max_violation(s.values), 1e-8);
    }
  }
}

}  // namespace
}  // namespace morevis
