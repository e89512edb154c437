// Convex subproblem engine shared by every outer algorithm.
//
// A subproblem has a variable v in R^N, optionally joined by a scale t, and
//
//   minimize    lambda * ||v||_1 - c^T v
//   subject to  any of
//     ||A v - y||_2 <= eta                 (residual ball; eta = 0 is Av = y)
//     ||t y - A v||_2 <= eta t             (scaled residual cone over (v, t))
//     ||v||_1 <= r, v_i >= 0 for listed i  (l1 ball with sign restrictions)
//     t >= t0                              (half-line)
//     lo <= v <= hi                        (coordinate bounds)
//
// Two backends solve it. Polyhedral instances (every residual constraint
// with eta = 0, no coordinate bounds) go to a dense bounded simplex that
// returns an exact vertex; everything else goes to an over-relaxed ADMM
// iteration built on the projections below.
#pragma once

#include "qratio/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qratio::conic {

struct Tolerances {
  // Absolute constraint violation allowed at "optimal", scaled by
  // 1 + magnitude of the constraint data.
  double feasibility = 1e-7;
  // Relative optimality tolerance of the ADMM stopping rule.
  double objective = 1e-7;
  int max_iterations = 20000;
};

struct ResidualBall {
  Matrix matrix;
  Vector center;
  double radius = 0.0;
};

struct ScaledResidualCone {
  Matrix matrix;
  Vector measurements;
  double eta = 0.0;
};

struct L1Ball {
  double radius = 1.0;
  std::vector<Index> nonnegative;
};

struct HalfLine {
  double lower = 0.0;
};

struct CoordinateBounds {
  Vector lower;
  Vector upper;
};

struct Constraints {
  Index dimension = 0;
  std::optional<ResidualBall> residual;
  std::optional<ScaledResidualCone> scaled_residual;
  std::optional<L1Ball> l1_ball;
  std::optional<HalfLine> half_line;
  std::optional<CoordinateBounds> bounds;

  bool has_scale() const { return scaled_residual.has_value() || half_line.has_value(); }
  bool is_polyhedral() const;
};

// minimize l1_weight * ||v||_1 - linear^T v
struct Objective {
  double l1_weight = 0.0;
  Vector linear;
};

struct ConicSubproblem {
  Objective objective;
  Constraints constraints;
  Tolerances tolerances;
};

enum class Status { optimal, max_iterations, infeasible, unbounded };
std::string to_string(Status s);

enum class Backend { automatic, simplex, admm };

struct ConicSolution {
  Vector point;
  // Value of t; 1 when the subproblem has no scale variable.
  double scale = 1.0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  Status status = Status::max_iterations;
  // For unbounded problems: a direction in v (with scale component
  // ray_scale) along which the objective decreases without bound.
  Vector ray;
  double ray_scale = 0.0;
  Backend backend = Backend::automatic;
};

namespace detail {
struct SimplexTableau;
}

// Opaque per-caller state carried between solves on the same engine. Copies
// are independent: solves replace the shared tableau instead of mutating it.
struct WarmStart {
  std::shared_ptr<const detail::SimplexTableau> tableau;
  Vector x, z, u;
  double rho = 0.0;
};

// Euclidean projection onto { v : ||v||_1 <= r }. Sort-based water-filling;
// equal magnitudes are processed in index order.
Vector project_l1_ball(const Eigen::Ref<const Vector>& z, double radius);

// Projection onto { ||v||_1 <= r, v_i >= 0 for i in nonnegative }: negative
// entries on restricted coordinates are zeroed, then the l1 projection applies.
Vector project_l1_ball(const Eigen::Ref<const Vector>& z, double radius,
                       const std::vector<Index>& nonnegative);

// Projection onto the second-order cone { (u, s) : ||u||_2 <= s }.
std::pair<Vector, double> project_soc(const Eigen::Ref<const Vector>& u, double s);

// Projection onto the ball { w : ||w - center||_2 <= radius }.
Vector project_ball(const Eigen::Ref<const Vector>& w, const Eigen::Ref<const Vector>& center,
                    double radius);

class SimplexBackend;
class AdmmBackend;

// Validates the constraints once and caches the backend data (factorized
// normal equations for ADMM, a phase-one basis for the simplex). solve() is
// const and reentrant; per-caller state lives in WarmStart.
class Engine {
 public:
  explicit Engine(Constraints constraints, Tolerances tolerances = {},
                  Backend backend = Backend::automatic);
  ~Engine();
  Engine(Engine&&) noexcept;
  Engine& operator=(Engine&&) noexcept;

  ConicSolution solve(const Objective& objective, WarmStart* warm = nullptr) const;

  const Constraints& constraints() const { return constraints_; }
  Backend backend() const { return backend_; }

 private:
  Constraints constraints_;
  Tolerances tolerances_;
  Backend backend_;
  std::unique_ptr<SimplexBackend> simplex_;
  std::unique_ptr<AdmmBackend> admm_;
};

ConicSolution solve_subproblem(const ConicSubproblem& problem,
                               const std::optional<Vector>& warm_start = std::nullopt,
                               Backend backend = Backend::automatic);

// maximize c^T v over the constraints (a subproblem with lambda = 0).
ConicSolution solve_lp(const Eigen::Ref<const Vector>& c, const Constraints& constraints,
                       const Tolerances& tolerances = {}, Backend backend = Backend::automatic);

// Largest violation of the constraints at (v, t), in absolute units.
double constraint_violation(const Constraints& constraints, const Eigen::Ref<const Vector>& v,
                            double t = 1.0);

}  // namespace qratio::conic
