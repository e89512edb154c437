#include "oracles.hpp"
#include "qratio/ensembles.hpp"
#include "qratio/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qratio;

namespace {

RecoveryProblem toy(const NormOrder& q) {
  return RecoveryProblem(oracle::toy_matrix(), oracle::toy_measurements(), 0.0, q);
}

struct SmallInstance {
  Matrix a;
  Vector x;
  Vector y;
};

SmallInstance small_instance(std::uint64_t seed, Index m, Index n, Index k) {
  SmallInstance s;
  s.a = gaussian_matrix({EnsembleKind::gaussian, m, n, 1.0, seed});
  s.x = sparse_signal(n, k, seed + 1000).signal;
  s.y = s.a * s.x;
  return s;
}

bool feasible(const SolveReport& r, const RecoveryProblem& p) {
  return r.residual_norm <= p.noise_bound() * (1.0 + 1e-6) + 1e-6 * (1.0 + p.measurements().norm());
}

}  // namespace

TEST(Subgradient, MatchesFiniteDifferences) {
  Rng rng(19);
  for (int t = 0; t < 100; ++t) {
    Vector v(8);
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    for (double q : {1.2, 1.5, 2.0, 3.0, 6.0}) {
      const Vector g = lq_subgradient(v, NormOrder::finite(q));
      const Vector fd = oracle::gradient([&](const Vector& z) { return oracle::norm(z, q); }, v);
      EXPECT_LT((g - fd).lpNorm<Eigen::Infinity>(), 1e-5) << "q=" << q;
    }
    const Vector g = lq_subgradient(v, NormOrder::infinity());
    const Vector fd = oracle::gradient([](const Vector& z) { return oracle::norm(z, 0.0); }, v);
    EXPECT_LT((g - fd).lpNorm<Eigen::Infinity>(), 1e-5);
  }
}

TEST(Subgradient, TiesAndZero) {
  Vector v(3);
  v << -2, 2, 1;
  const Vector g = lq_subgradient(v, NormOrder::infinity());
  EXPECT_EQ(g[0], -1.0);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_THROW(lq_subgradient(Vector::Zero(3), NormOrder::finite(2.0)), InvalidArgument);
  EXPECT_THROW(lq_subgradient(v, NormOrder::finite(1.0)), InvalidArgument);
}

TEST(Solvers, ToyGlobalMinimizerAtQTwo) {
  const Vector want = oracle::toy_point(0.0);
  const RecoveryProblem p = toy(NormOrder::finite(2.0));
  const SolveReport pm = pm_solve(p);
  const SolveReport ccp = ccp_solve(p);
  EXPECT_LT((pm.solution - want).lpNorm<Eigen::Infinity>(), 1e-3);
  EXPECT_LT((ccp.solution - want).lpNorm<Eigen::Infinity>(), 1e-3);
  EXPECT_EQ(pm.termination, Termination::converged);
  EXPECT_EQ(ccp.termination, Termination::converged);
}

TEST(Solvers, ToyAgreesWithEnumeration) {
  for (double q : {1.5, 2.0, 4.0}) {
    const NormOrder order = NormOrder::finite(q);
    const double want = oracle::affine_ratio(oracle::toy_matrix(), oracle::toy_measurements(), q);
    EXPECT_NEAR(pm_solve(toy(order)).objective_value, want, 1e-6 * want) << q;
    EXPECT_NEAR(ccp_solve(toy(order)).objective_value, want, 1e-6 * want) << q;
  }
  const double want = oracle::affine_ratio(oracle::toy_matrix(), oracle::toy_measurements(), 0.0);
  EXPECT_NEAR(lp_solve_linf(toy(NormOrder::infinity())).objective_value, want, 1e-6 * want);
}

TEST(Solvers, LpMethodIsGlobalOnSmallInstances) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const SmallInstance s = small_instance(seed, 4, 9, 2);
    const RecoveryProblem p(s.a, s.y, 0.0, NormOrder::infinity());
    const double want = oracle::affine_ratio(s.a, s.y, 0.0);
    const SolveReport lp = lp_solve_linf(p);
    EXPECT_GE(lp.objective_value, want * (1.0 - 1e-9));
    EXPECT_LE(lp.objective_value, want * (1.0 + 1e-3)) << seed;
    EXPECT_TRUE(feasible(lp, p));
    // The nonconvex methods can only do as well as the global value.
    EXPECT_GE(pm_solve(p).objective_value, want * (1.0 - 1e-9));
    EXPECT_GE(ccp_solve(p).objective_value, want * (1.0 - 1e-9));
  }
}

TEST(Solvers, BpdnOnIdentity) {
  Vector y(2);
  y << 5, 0;
  const RecoveryProblem p(Matrix::Identity(2, 2), y, 1.0, NormOrder::finite(2.0));
  const SolveReport r = bpdn_solve(p);
  EXPECT_NEAR(r.solution[0], 4.0, 1e-6);
  EXPECT_NEAR(r.solution[1], 0.0, 1e-6);
  EXPECT_EQ(r.termination, Termination::converged);
}

TEST(Solvers, CcpTraceAscends) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SmallInstance s = small_instance(seed, 15, 40, 5);
    for (double sigma : {0.0, 0.05}) {
      Vector y = s.y;
      double eta = 0.0;
      if (sigma > 0.0) {
        const Vector e = gaussian_noise(15, sigma, seed + 7);
        y += e;
        eta = e.norm();
      }
      for (const NormOrder& q : {NormOrder::finite(1.5), NormOrder::finite(3.0), NormOrder::infinity()}) {
        CcpState state;
        CcpOptions o;
        o.restarts = 2;
        ccp_solve(RecoveryProblem(s.a, y, eta, q), o, &state);
        ASSERT_FALSE(state.objective_trace.empty());
        for (std::size_t i = 1; i < state.objective_trace.size(); ++i) {
          EXPECT_GE(state.objective_trace[i], state.objective_trace[i - 1] - 1e-9);
        }
        EXPECT_GE(state.t, state.t0 * (1.0 - 1e-9));
      }
    }
  }
}

TEST(Solvers, ParametricLambdaIncreases) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SmallInstance s = small_instance(seed, 15, 40, 6);
    for (const NormOrder& q : {NormOrder::finite(1.5), NormOrder::finite(2.0), NormOrder::infinity()}) {
      ParametricState st;
      PmOptions o;
      o.dca.restarts = 2;
      const SolveReport r = pm_solve(RecoveryProblem(s.a, s.y, 0.0, q), o, &st);
      ASSERT_FALSE(st.history.empty());
      for (std::size_t i = 1; i < st.history.size(); ++i) {
        EXPECT_GE(st.history[i].first, st.history[i - 1].first * (1.0 - 1e-12));
      }
      // F(lambda) <= 0 for lambda at or below the optimal inverse ratio.
      for (const auto& [lambda, f] : st.history) EXPECT_LE(f, 1e-9);
      EXPECT_NE(r.termination, Termination::non_monotone);
    }
  }
}

TEST(Solvers, ReportsAreFeasible) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const SmallInstance s = small_instance(seed, 20, 50, 4);
    for (double sigma : {0.0, 0.01, 0.1}) {
      Vector y = s.y;
      double eta = 0.0;
      if (sigma > 0.0) {
        const Vector e = gaussian_noise(20, sigma, seed + 50);
        y += e;
        eta = e.norm();
      }
      const RecoveryProblem p(s.a, y, eta, NormOrder::finite(2.0));
      CcpOptions co;
      co.restarts = 2;
      PmOptions po;
      po.dca.restarts = 2;
      DcaOptions lo;
      lo.restarts = 0;
      for (const SolveReport& r : {pm_solve(p, po), ccp_solve(p, co), bpdn_solve(p), l1_minus_l2_solve(p, lo),
                                   lp_solve_linf(p.with_order(NormOrder::infinity()))}) {
        if (r.termination == Termination::converged) {
          EXPECT_TRUE(feasible(r, p)) << r.method << " sigma=" << sigma << " residual=" << r.residual_norm;
        }
        EXPECT_NEAR(r.residual_norm, p.residual_norm(r.solution), 1e-12);
        EXPECT_NEAR(r.objective_value, norm_ratio(r.solution, r.method == "lp-inf" ? NormOrder::infinity() : p.q()),
                    1e-12 * (1.0 + r.objective_value));
      }
    }
  }
}

TEST(Solvers, ExactRecoveryOfVerySparseSignal) {
  const SmallInstance s = small_instance(3, 30, 80, 3);
  for (const NormOrder& q : {NormOrder::finite(1.5), NormOrder::finite(2.0), NormOrder::infinity()}) {
    const RecoveryProblem p(s.a, s.y, 0.0, q);
    EXPECT_LT((pm_solve(p).solution - s.x).norm() / s.x.norm(), 1e-6);
    EXPECT_LT((ccp_solve(p).solution - s.x).norm() / s.x.norm(), 1e-6);
  }
}

TEST(Solvers, ZeroFeasibleIsDegenerate) {
  Vector y(2);
  y << 0.1, 0.0;
  const RecoveryProblem p(Matrix::Identity(2, 3), y, 0.5, NormOrder::finite(2.0));
  EXPECT_EQ(pm_solve(p).termination, Termination::degenerate_zero);
  EXPECT_EQ(ccp_solve(p).termination, Termination::degenerate_zero);
  EXPECT_EQ(pm_solve(p).solution, Vector::Zero(3));
}

TEST(Solvers, InfeasibleIsReported) {
  Matrix a(2, 3);
  a << 1, 0, 0,
       1, 0, 0;
  Vector y(2);
  y << 1, 3;
  const RecoveryProblem p(a, y, 0.0, NormOrder::finite(2.0));
  EXPECT_EQ(pm_solve(p).termination, Termination::infeasible);
  EXPECT_EQ(ccp_solve(p).termination, Termination::infeasible);
  EXPECT_EQ(bpdn_solve(p).termination, Termination::infeasible);
}

TEST(Solvers, ArgumentChecks) {
  const RecoveryProblem p = toy(NormOrder::finite(2.0));
  EXPECT_THROW(lp_solve_linf(p), InvalidArgument);
  EXPECT_THROW(l1_minus_l2_solve(p.with_order(NormOrder::finite(3.0))), InvalidArgument);
  PmOptions bad;
  bad.delta = 0.0;
  EXPECT_THROW(pm_solve(p, bad), InvalidArgument);
  CcpOptions cap;
  cap.cap_factor = 0.5;
  EXPECT_THROW(ccp_solve(p, cap), InvalidArgument);
  EXPECT_THROW(dca_solve_Q(p, -1.0), InvalidArgument);
}

TEST(Solvers, DeterministicAcrossRuns) {
  const SmallInstance s = small_instance(9, 20, 60, 8);
  const RecoveryProblem p(s.a, s.y, 0.0, NormOrder::finite(1.5));
  EXPECT_EQ(pm_solve(p).solution, pm_solve(p).solution);
  EXPECT_EQ(ccp_solve(p).solution, ccp_solve(p).solution);
}

TEST(Solvers, DcaDecreasesQObjective) {
  const SmallInstance s = small_instance(4, 15, 40, 6);
  const RecoveryProblem p(s.a, s.y, 0.0, NormOrder::finite(2.0));
  DcaOptions o;
  o.restarts = 0;
  const QSolution qs = dca_solve_Q(p, 0.3, o);
  for (std::size_t i = 1; i < qs.trace.size(); ++i) EXPECT_LE(qs.trace[i], qs.trace[i - 1] + 1e-9);
  EXPECT_NEAR(qs.f_value, 0.3 * l1_norm(qs.x) - lq_norm(qs.x, p.q()), 1e-12);
}
