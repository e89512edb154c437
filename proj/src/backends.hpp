// Backend implementations behind conic::Engine.
#pragma once

#include "qratio/conic.hpp"
#include "simplex.hpp"

#include <optional>

namespace qratio::conic {

// Polyhedral subproblems as a standard-form LP. Each v_i is split into
// p_i - n_i (n_i omitted for sign-restricted coordinates), t is shifted to
// t0 + t', and the l1 ball gets a slack column.
class SimplexBackend {
 public:
  explicit SimplexBackend(const Constraints& constraints);
  ConicSolution solve(const Objective& objective, WarmStart* warm) const;

 private:
  Index dim_ = 0;
  std::vector<Index> pos_, neg_;  // neg_[i] = -1 when v_i >= 0 is enforced
  Index scale_col_ = -1;
  double scale_offset_ = 0.0;
  Index cols_ = 0;
  std::optional<detail::DenseSimplex> lp_;
};

// Over-relaxed ADMM on  min f(x) + h(Mx)  with x = (v[, t]). M stacks an
// identity on v (carrying lambda ||v||_1 and the l1 ball), an identity on t
// (half-line), an optional identity for coordinate bounds, and the scaled
// residual rows. Equality constraints (eta = 0) live in the x-update, which
// is a precomputed affine map because M^T M does not depend on rho.
class AdmmBackend {
 public:
  AdmmBackend(const Constraints& constraints, const Tolerances& tolerances);
  ConicSolution solve(const Objective& objective, WarmStart* warm) const;

 private:
  Vector apply_m(const Vector& x) const;
  Vector apply_mt(const Vector& w) const;
  Vector prox(const Vector& w, double l1_shrink) const;
  // Cleans d (a direction in x) onto the recession cone of the residual
  // ball; returns the cleaned unit direction if it keeps every point
  // feasible and strictly decreases lambda ||v||_1 - c^T v.
  std::optional<Vector> descent_ray(const Vector& d, double lambda, const Vector& c) const;

  Constraints cons_;
  Tolerances tol_;
  Index dim_ = 0;
  Index n_ = 0;
  bool has_t_ = false;
  bool infeasible_ = false;
  double data_scale_ = 1.0;

  // Block offsets into z (-1 when absent).
  Index off_v_ = 0, off_t_ = -1, off_box_ = -1, off_ball_ = -1, off_soc_ = -1;
  Index z_size_ = 0;

  // Row-scaled copies of the residual data (scaled by 1 / ||A||_2).
  Matrix ball_a_;
  Vector ball_center_;
  double ball_radius_ = 0.0;
  Matrix soc_a_;
  Vector soc_y_;
  double soc_eta_ = 0.0;

  // Orthogonal projector onto ker(A) of the residual ball (radius > 0 only).
  Matrix ball_null_;
  Matrix projector_;
  Vector offset_;
};

}  // namespace qratio::conic
