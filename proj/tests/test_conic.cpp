#include "oracles.hpp"
#include "qratio/conic.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qratio;
using namespace qratio::conic;

namespace {

Matrix random_matrix(Rng& rng, Index m, Index n) {
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = rng.normal();
  return a;
}

// Basis pursuit by enumerating basic solutions: the l1 minimum over
// { Av = y } is attained with at most rank(A) nonzeros.
double basis_pursuit_oracle(const Matrix& a, const Vector& y) {
  const Index n = a.cols();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j)
      if (mask & (1u << j)) cols.push_back(j);
    if (static_cast<Index>(cols.size()) > a.rows()) continue;
    Matrix sub(a.rows(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(c) = a.col(cols[c]);
    const Vector v = sub.colPivHouseholderQr().solve(y);
    if ((sub * v - y).norm() > 1e-9 * (1.0 + y.norm())) continue;
    best = std::min(best, v.lpNorm<1>());
  }
  return best;
}

}  // namespace

TEST(Projections, L1BallMatchesGridSearch) {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    Vector p(2);
    p << 2.0 * rng.normal(), 2.0 * rng.normal();
    const double r = 0.5 + rng.uniform();
    const Vector got = project_l1_ball(p, r);
    const double h = r / std::ceil(r / 1e-3);
    const Vector want =
        oracle::grid_projection(p, [&](const Vector& x) { return x.lpNorm<1>() <= r * (1.0 + 1e-12); }, r, h);
    EXPECT_LE((got - p).norm(), (want - p).norm() + 1e-12);
    EXPECT_LT((got - want).norm(), 1e-3);
    EXPECT_LE(got.lpNorm<1>(), r * (1.0 + 1e-12));
  }
}

TEST(Projections, L1BallOptimality) {
  // Projection is the unique point with <p - x, w - x> <= 0 for all w in the
  // ball; checking the vertices +-r e_i suffices.
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    Vector p(10);
    for (Index i = 0; i < 10; ++i) p[i] = 3.0 * rng.normal();
    const Vector x = project_l1_ball(p, 1.0);
    for (Index i = 0; i < 10; ++i) {
      for (double s : {1.0, -1.0}) {
        Vector w = Vector::Zero(10);
        w[i] = s;
        EXPECT_LE((p - x).dot(w - x), 1e-10);
      }
    }
  }
  Vector inside(3);
  inside << 0.1, -0.2, 0.3;
  EXPECT_EQ(project_l1_ball(inside, 1.0), inside);
  EXPECT_THROW(project_l1_ball(inside, 0.0), InvalidArgument);
}

TEST(Projections, SignRestrictedL1Ball) {
  Vector p(2);
  p << -0.7, 0.4;
  const auto in_set = [](const Vector& x) { return x.lpNorm<1>() <= 0.5 + 1e-12 && x[0] >= 0.0; };
  const Vector got = project_l1_ball(p, 0.5, {0});
  const Vector want = oracle::grid_projection(p, in_set, 0.5, 1e-3);
  EXPECT_LT((got - want).norm(), 1e-3);
  EXPECT_GE(got[0], 0.0);
}

TEST(Projections, SecondOrderConeMatchesGridSearch) {
  Rng rng(4);
  const auto in_cone = [](const Vector& x) { return std::abs(x[0]) <= x[1] + 1e-12; };
  for (int t = 0; t < 10; ++t) {
    Vector p(2);
    p << rng.normal(), rng.normal();
    auto [u, s] = project_soc(p.head(1), p[1]);
    Vector got(2);
    got << u, s;
    const Vector want = oracle::grid_projection(p, in_cone, std::ceil(p.norm() / 1e-3) * 1e-3, 1e-3);
    EXPECT_LE((got - p).norm(), (want - p).norm() + 1e-12);
    EXPECT_LT((got - want).norm(), 1e-3);
  }
  Vector u(2);
  u << 3, 4;
  auto [pu, ps] = project_soc(u, -6.0);
  EXPECT_EQ(ps, 0.0);
  EXPECT_EQ(pu, Vector::Zero(2));
}

TEST(Projections, Ball) {
  Vector c(2), w(2);
  c << 1, 1;
  w << 4, 5;
  const Vector p = project_ball(w, c, 2.5);
  EXPECT_NEAR((p - c).norm(), 2.5, 1e-14);
  EXPECT_NEAR(p[0], 1.0 + 1.5, 1e-14);
  EXPECT_EQ(project_ball(c, c, 0.0), c);
}

TEST(Engine, BackendSelection) {
  Constraints c;
  c.dimension = 3;
  c.residual = ResidualBall{Matrix::Identity(2, 3), Vector::Zero(2), 0.0};
  EXPECT_TRUE(c.is_polyhedral());
  EXPECT_EQ(Engine(c).backend(), Backend::simplex);
  c.residual->radius = 0.1;
  EXPECT_FALSE(c.is_polyhedral());
  EXPECT_EQ(Engine(c).backend(), Backend::admm);
  EXPECT_THROW(Engine(c, {}, Backend::simplex), InvalidArgument);
  c.residual->radius = -1.0;
  EXPECT_THROW(Engine{c}, InvalidArgument);
}

TEST(Engine, BasisPursuitAgreesAcrossBackendsAndOracle) {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_matrix(rng, 3, 7);
    Vector y(3);
    for (Index i = 0; i < 3; ++i) y[i] = rng.normal();
    Constraints c;
    c.dimension = 7;
    c.residual = ResidualBall{a, y, 0.0};
    const Objective obj{1.0, Vector::Zero(7)};
    const ConicSolution s = Engine(c, {}, Backend::simplex).solve(obj);
    Tolerances tight;
    tight.feasibility = 1e-10;
    tight.objective = 1e-10;
    tight.max_iterations = 200000;
    const ConicSolution d = Engine(c, tight, Backend::admm).solve(obj);
    const double want = basis_pursuit_oracle(a, y);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.objective, want, 1e-9 * (1.0 + want));
    EXPECT_NEAR(d.objective, want, 1e-5 * (1.0 + want));
    EXPECT_LT(s.primal_residual, 1e-9);
    EXPECT_LT(d.primal_residual, 1e-6);
  }
}

TEST(Engine, DenoisingOnIdentity) {
  Constraints c;
  c.dimension = 2;
  Vector y(2);
  y << 5, 0;
  c.residual = ResidualBall{Matrix::Identity(2, 2), y, 1.0};
  const ConicSolution s = Engine(c).solve(Objective{1.0, Vector::Zero(2)});
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.point[0], 4.0, 1e-6);
  EXPECT_NEAR(s.point[1], 0.0, 1e-6);
}

TEST(Engine, InfeasibleIsReported) {
  Matrix a(2, 3);
  a << 1, 0, 0,
       1, 0, 0;
  Vector y(2);
  y << 1, 2;
  for (double radius : {0.0, 0.1}) {
    Constraints c;
    c.dimension = 3;
    c.residual = ResidualBall{a, y, radius};
    EXPECT_EQ(Engine(c).solve(Objective{1.0, Vector::Zero(3)}).status, Status::infeasible) << radius;
  }
}

TEST(Engine, UnboundedRayOnBothBackends) {
  // ker A = span (1, 1, 0); lambda ||v||_1 - c^T v falls along it when
  // c = (1, 1, 0) and lambda < 1.
  Matrix a(2, 3);
  a << 1, -1, 0,
       0, 0, 1;
  Vector y(2);
  y << 1, 1;
  Vector c(3);
  c << 1, 1, 0;
  for (double radius : {0.0, 0.2}) {
    Constraints cons;
    cons.dimension = 3;
    cons.residual = ResidualBall{a, y, radius};
    const ConicSolution s = Engine(cons).solve(Objective{0.5, c});
    ASSERT_EQ(s.status, Status::unbounded) << radius;
    ASSERT_EQ(s.ray.size(), 3);
    EXPECT_LT((a * s.ray).norm(), 1e-6 * s.ray.norm());
    EXPECT_LT(0.5 * s.ray.lpNorm<1>() - c.dot(s.ray), 0.0);
  }
}

TEST(Engine, ScaledConeMatchesBruteForceInTwoDimensions) {
  // maximize v_0 over { ||t y - A v|| <= eta t, ||v||_1 <= 1, t >= t0 }.
  Matrix a(1, 2);
  a << 1, 1;
  Vector y(1);
  y << 1;
  Constraints c;
  c.dimension = 2;
  c.scaled_residual = ScaledResidualCone{a, y, 0.2};
  c.l1_ball = L1Ball{1.0, {}};
  c.half_line = HalfLine{0.1};
  Vector obj(2);
  obj << 1, 0;
  const ConicSolution s = Engine(c).solve(Objective{0.0, obj});
  ASSERT_EQ(s.status, Status::optimal);
  // Brute force over a grid in (v0, v1, t).
  double best = -1.0;
  for (int i = -100; i <= 100; ++i)
    for (int j = -100; j <= 100; ++j) {
      Vector v(2);
      v << i / 100.0, j / 100.0;
      if (v.lpNorm<1>() > 1.0) continue;
      for (int k = 10; k <= 300; ++k) {
        const double t = k / 100.0;
        if (std::abs(t - v.sum()) <= 0.2 * t) best = std::max(best, v[0]);
      }
    }
  EXPECT_NEAR(s.point[0], best, 1e-2);
  EXPECT_LT(constraint_violation(c, s.point, s.scale), 1e-6);
}

TEST(Engine, WarmStartReproducesColdSolve) {
  Rng rng(31);
  const Matrix a = random_matrix(rng, 4, 10);
  Vector y(4);
  for (Index i = 0; i < 4; ++i) y[i] = rng.normal();
  Constraints c;
  c.dimension = 10;
  c.residual = ResidualBall{a, y, 0.0};
  const Engine e(c);
  WarmStart warm;
  for (int t = 0; t < 10; ++t) {
    Vector g(10);
    for (Index i = 0; i < 10; ++i) g[i] = rng.normal() * 0.5;
    const ConicSolution hot = e.solve(Objective{1.0, g}, &warm);
    const ConicSolution cold = e.solve(Objective{1.0, g});
    EXPECT_EQ(hot.status, cold.status);
    if (cold.status == Status::optimal) EXPECT_NEAR(hot.objective, cold.objective, 1e-9);
  }
}

TEST(Engine, ConstraintViolation) {
  Constraints c;
  c.dimension = 2;
  c.l1_ball = L1Ball{1.0, {1}};
  c.bounds = CoordinateBounds{Vector::Constant(2, -0.5), Vector::Constant(2, 0.5)};
  Vector v(2);
  v << 0.4, -0.3;
  EXPECT_NEAR(constraint_violation(c, v), 0.3, 1e-15);
  v << 0.9, 0.9;
  EXPECT_NEAR(constraint_violation(c, v), 0.8, 1e-15);
  v << 0.2, 0.2;
  EXPECT_EQ(constraint_violation(c, v), 0.0);
}

TEST(Engine, RejectsBadObjective) {
  Constraints c;
  c.dimension = 2;
  c.l1_ball = L1Ball{1.0, {}};
  const Engine e(c);
  EXPECT_THROW(e.solve(Objective{1.0, Vector::Zero(3)}), InvalidArgument);
  EXPECT_THROW(e.solve(Objective{-1.0, Vector::Zero(2)}), InvalidArgument);
}

TEST(Engine, SolveLpOnCrossPolytope) {
  Constraints c;
  c.dimension = 3;
  c.l1_ball = L1Ball{2.0, {}};
  Vector obj(3);
  obj << 1, -3, 2;
  for (Backend b : {Backend::simplex, Backend::admm}) {
    const ConicSolution s = solve_lp(obj, c, {}, b);
    EXPECT_NEAR(s.objective, 6.0, 1e-5);
    EXPECT_NEAR(s.point[1], -2.0, 1e-5);
  }
}
