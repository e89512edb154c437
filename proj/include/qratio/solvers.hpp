// Outer algorithms for  min ||z||_1 / ||z||_q  s.t.  ||A z - y||_2 <= eta:
// the parametric method with a DCA inner loop, the convex-concave procedure
// on the normalized variables (v, t), the LP method for q = inf, and the
// l1 and l1 - l2 baselines. Every convex step goes through conic::Engine.
#pragma once

#include "qratio/conic.hpp"
#include "qratio/model.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace qratio {

// d||v||_q at v: ||v||_q^(1-q) |v|^(q-1) sign(v) for finite q; for q = inf
// sign(v_j) e_j with j the smallest index attaining the maximum magnitude.
Vector lq_subgradient(const Eigen::Ref<const Vector>& v, const NormOrder& q);

struct DcaOptions {
  int max_iterations = 100;
  // ||x_{k+1} - x_k||_2 / max(||x_k||_2, 1) below this stops the loop.
  double step_tolerance = 1e-8;
  // Additional DCA runs started from seeded kernel perturbations of the
  // first run's result; the lowest Q(lambda) value wins.
  int restarts = 16;
  std::uint64_t seed = 0x5eed;
  conic::Tolerances conic;
};

struct QSolution {
  Vector x;
  double f_value = 0.0;
  int iterations = 0;
  Termination termination = Termination::max_iterations;
  // Values of lambda ||x||_1 - ||x||_q along the iterates.
  std::vector<double> trace;
  // Set when a subproblem was unbounded: lambda ||z||_1 - ||z||_q -> -inf
  // along x + s * ray.
  std::optional<Vector> ray;
};

// Solves Q(lambda) = min lambda ||z||_1 - ||z||_q over the feasible set by
// DCA. The first run starts from x0 = 0 unless `start` is given. The engine, when
// supplied, must hold the residual ball of `problem`.
QSolution dca_solve_Q(const RecoveryProblem& problem, double lambda, const DcaOptions& options = {},
                      const Vector* start = nullptr, const conic::Engine* engine = nullptr);

struct ParametricState {
  double lambda = 0.0;
  double f_value = 0.0;
  Vector iterate;
  double delta = 1e-5;
  std::vector<std::pair<double, double>> history;
};

struct PmOptions {
  double delta = 1e-5;
  int max_outer_iterations = 100;
  DcaOptions dca;
};

SolveReport pm_solve(const RecoveryProblem& problem, const PmOptions& options = {},
                     ParametricState* state = nullptr);

struct CcpState {
  Vector v;
  double t = 0.0;
  double t0 = 0.0;
  double a = 0.0;
  std::vector<double> objective_trace;
};

struct CcpOptions {
  // t0 = 1 / a with a = cap_factor * ||x_bpdn||_1.
  double cap_factor = 100.0;
  int max_iterations = 100;
  // Relative change of ||v||_q below this stops the loop.
  double tolerance = 1e-8;
  // Additional CCP runs from seeded kernel perturbations of the best point.
  int restarts = 16;
  std::uint64_t seed = 0x5eed;
  conic::Tolerances conic;
};

SolveReport ccp_solve(const RecoveryProblem& problem, const CcpOptions& options = {},
                      CcpState* state = nullptr);

struct LpOptions {
  double cap_factor = 100.0;
  conic::Tolerances conic;
};

// q = inf only. Maximizes +-v_i over the normalized feasible set for every i
// and keeps the best; ties go to the smallest i, then to the + sign.
SolveReport lp_solve_linf(const RecoveryProblem& problem, const LpOptions& options = {});

// min ||z||_1 s.t. ||A z - y||_2 <= eta.
SolveReport bpdn_solve(const RecoveryProblem& problem, const conic::Tolerances& tolerances = {});

// One DCA run of Q(1) at q = 2, i.e. min ||z||_1 - ||z||_2.
SolveReport l1_minus_l2_solve(const RecoveryProblem& problem, const DcaOptions& options = {});

// Constraint set of the residual ball ||A z - y||_2 <= eta.
conic::Constraints residual_constraints(const RecoveryProblem& problem);

// Constraint set T = { t >= t0, ||t y - A v||_2 <= eta t, ||v||_1 <= 1 }.
conic::Constraints normalized_constraints(const RecoveryProblem& problem, double t0);

}  // namespace qratio
