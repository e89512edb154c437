#include "qratio/conic.hpp"

#include "backends.hpp"

#include <algorithm>
#include <cmath>

namespace qratio::conic {
namespace {

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + " contains non-finite entries");
}

void validate(const Constraints& c) {
  const Index n = c.dimension;
  if (n <= 0) throw InvalidArgument("constraints: dimension must be positive");
  if (c.residual) {
    const auto& r = *c.residual;
    if (r.matrix.cols() != n || r.matrix.rows() != r.center.size()) {
      throw InvalidArgument("residual ball: dimension mismatch");
    }
    check_finite(r.matrix, "residual ball matrix");
    check_finite(r.center, "residual ball center");
    if (!(r.radius >= 0.0) || !std::isfinite(r.radius)) {
      throw InvalidArgument("residual ball: radius must be finite and >= 0");
    }
  }
  if (c.scaled_residual) {
    const auto& s = *c.scaled_residual;
    if (s.matrix.cols() != n || s.matrix.rows() != s.measurements.size()) {
      throw InvalidArgument("scaled residual: dimension mismatch");
    }
    check_finite(s.matrix, "scaled residual matrix");
    check_finite(s.measurements, "scaled residual measurements");
    if (!(s.eta >= 0.0) || !std::isfinite(s.eta)) {
      throw InvalidArgument("scaled residual: eta must be finite and >= 0");
    }
  }
  if (c.l1_ball) {
    if (!(c.l1_ball->radius >= 0.0) || !std::isfinite(c.l1_ball->radius)) {
      throw InvalidArgument("l1 ball: radius must be finite and >= 0");
    }
    for (Index i : c.l1_ball->nonnegative) {
      if (i < 0 || i >= n) throw InvalidArgument("l1 ball: sign restriction index out of range");
    }
  }
  if (c.half_line && !std::isfinite(c.half_line->lower)) {
    throw InvalidArgument("half-line: lower bound must be finite");
  }
  if (c.bounds) {
    const auto& b = *c.bounds;
    if (b.lower.size() != n || b.upper.size() != n) throw InvalidArgument("bounds: size mismatch");
    for (Index i = 0; i < n; ++i) {
      if (std::isnan(b.lower[i]) || std::isnan(b.upper[i]) || b.lower[i] > b.upper[i]) {
        throw InvalidArgument("bounds: require lower <= upper");
      }
    }
  }
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::max_iterations: return "max_iterations";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "unknown";
}

bool Constraints::is_polyhedral() const {
  if (bounds) return false;
  if (residual && residual->radius > 0.0) return false;
  if (scaled_residual && scaled_residual->eta > 0.0) return false;
  return true;
}

double constraint_violation(const Constraints& c, const Eigen::Ref<const Vector>& v, double t) {
  double worst = 0.0;
  if (c.residual) {
    const auto& r = *c.residual;
    worst = std::max(worst, (r.matrix * v - r.center).norm() - r.radius);
  }
  if (c.scaled_residual) {
    const auto& s = *c.scaled_residual;
    worst = std::max(worst, (t * s.measurements - s.matrix * v).norm() - s.eta * t);
    worst = std::max(worst, -t);
  }
  if (c.l1_ball) {
    worst = std::max(worst, l1_norm(v) - c.l1_ball->radius);
    for (Index i : c.l1_ball->nonnegative) worst = std::max(worst, -v[i]);
  }
  if (c.half_line) worst = std::max(worst, c.half_line->lower - t);
  if (c.bounds) {
    worst = std::max(worst, (c.bounds->lower - v).maxCoeff());
    worst = std::max(worst, (v - c.bounds->upper).maxCoeff());
  }
  return std::max(worst, 0.0);
}

SimplexBackend::SimplexBackend(const Constraints& c) : dim_(c.dimension) {
  std::vector<char> restricted(dim_, 0);
  if (c.l1_ball) {
    for (Index i : c.l1_ball->nonnegative) restricted[i] = 1;
  }
  pos_.resize(dim_);
  neg_.assign(dim_, -1);
  Index col = 0;
  for (Index i = 0; i < dim_; ++i) {
    pos_[i] = col++;
    if (!restricted[i]) neg_[i] = col++;
  }
  if (c.has_scale()) {
    scale_col_ = col++;
    scale_offset_ = c.half_line ? c.half_line->lower : 0.0;
  }
  Index slack_col = -1;
  if (c.l1_ball) slack_col = col++;
  cols_ = col;

  Index rows = 0;
  if (c.residual) rows += c.residual->matrix.rows();
  if (c.scaled_residual) rows += c.scaled_residual->matrix.rows();
  if (c.l1_ball) rows += 1;
  Matrix a = Matrix::Zero(rows, cols_);
  Vector b = Vector::Zero(rows);
  Index row = 0;
  auto put_v = [&](const Matrix& m, Index first_row) {
    for (Index i = 0; i < dim_; ++i) {
      a.block(first_row, pos_[i], m.rows(), 1) = m.col(i);
      if (neg_[i] >= 0) a.block(first_row, neg_[i], m.rows(), 1) = -m.col(i);
    }
  };
  if (c.residual) {
    const auto& r = *c.residual;
    put_v(r.matrix, row);
    b.segment(row, r.center.size()) = r.center;
    row += r.matrix.rows();
  }
  if (c.scaled_residual) {
    const auto& s = *c.scaled_residual;
    put_v(s.matrix, row);
    a.block(row, scale_col_, s.matrix.rows(), 1) = -s.measurements;
    b.segment(row, s.measurements.size()) = scale_offset_ * s.measurements;
    row += s.matrix.rows();
  }
  if (c.l1_ball) {
    for (Index i = 0; i < dim_; ++i) {
      a(row, pos_[i]) = 1.0;
      if (neg_[i] >= 0) a(row, neg_[i]) = 1.0;
    }
    a(row, slack_col) = 1.0;
    b[row] = c.l1_ball->radius;
  }
  lp_.emplace(std::move(a), std::move(b));
}

ConicSolution SimplexBackend::solve(const Objective& objective, WarmStart* warm) const {
  ConicSolution out;
  out.backend = Backend::simplex;
  Vector cost = Vector::Zero(cols_);
  for (Index i = 0; i < dim_; ++i) {
    cost[pos_[i]] = objective.l1_weight - objective.linear[i];
    if (neg_[i] >= 0) cost[neg_[i]] = objective.l1_weight + objective.linear[i];
  }
  const detail::LpOutcome lp = lp_->minimize(cost, warm ? warm->tableau.get() : nullptr);
  out.iterations = lp.pivots;
  auto recombine = [&](const Vector& x, Vector& v, double& t, double t_offset) {
    v = Vector::Zero(dim_);
    for (Index i = 0; i < dim_; ++i) {
      v[i] = x[pos_[i]] - (neg_[i] >= 0 ? x[neg_[i]] : 0.0);
    }
    t = scale_col_ >= 0 ? t_offset + x[scale_col_] : 1.0;
  };
  switch (lp.status) {
    case detail::LpStatus::infeasible:
      out.status = Status::infeasible;
      out.point = Vector::Zero(dim_);
      return out;
    case detail::LpStatus::unbounded: {
      out.status = Status::unbounded;
      recombine(lp.x, out.point, out.scale, scale_offset_);
      recombine(lp.ray, out.ray, out.ray_scale, 0.0);
      if (scale_col_ < 0) out.ray_scale = 0.0;
      break;
    }
    case detail::LpStatus::optimal: out.status = Status::optimal; break;
    case detail::LpStatus::iteration_limit: out.status = Status::max_iterations; break;
  }
  if (out.status != Status::unbounded) {
    if (lp.x.size() != cols_) {
      out.point = Vector::Zero(dim_);
      return out;
    }
    recombine(lp.x, out.point, out.scale, scale_offset_);
  }
  out.objective = objective.l1_weight * l1_norm(out.point) - objective.linear.dot(out.point);
  if (warm && lp.tableau) warm->tableau = lp.tableau;
  return out;
}

Engine::Engine(Constraints constraints, Tolerances tolerances, Backend backend)
    : constraints_(std::move(constraints)), tolerances_(tolerances), backend_(backend) {
  validate(constraints_);
  if (backend_ == Backend::automatic) {
    backend_ = constraints_.is_polyhedral() ? Backend::simplex : Backend::admm;
  }
  if (backend_ == Backend::simplex) {
    if (!constraints_.is_polyhedral()) {
      throw InvalidArgument("simplex backend requires polyhedral constraints");
    }
    simplex_ = std::make_unique<SimplexBackend>(constraints_);
  } else {
    admm_ = std::make_unique<AdmmBackend>(constraints_, tolerances_);
  }
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;
Engine& Engine::operator=(Engine&&) noexcept = default;

ConicSolution Engine::solve(const Objective& objective, WarmStart* warm) const {
  if (objective.linear.size() != constraints_.dimension) {
    throw InvalidArgument("objective: linear term has wrong length");
  }
  if (!objective.linear.allFinite() || !std::isfinite(objective.l1_weight) ||
      objective.l1_weight < 0.0) {
    throw InvalidArgument("objective: weights must be finite and l1 weight >= 0");
  }
  ConicSolution sol = simplex_ ? simplex_->solve(objective, warm) : admm_->solve(objective, warm);
  if (sol.status == Status::optimal || sol.status == Status::max_iterations) {
    sol.primal_residual = constraint_violation(constraints_, sol.point, sol.scale);
  }
  return sol;
}

ConicSolution solve_subproblem(const ConicSubproblem& problem, const std::optional<Vector>& warm_start,
                               Backend backend) {
  Engine engine(problem.constraints, problem.tolerances, backend);
  WarmStart warm;
  if (warm_start) {
    const Index n = problem.constraints.dimension;
    if (warm_start->size() != n) throw InvalidArgument("warm start has wrong length");
    if (problem.constraints.has_scale()) {
      warm.x = Vector(n + 1);
      warm.x.head(n) = *warm_start;
      warm.x[n] = problem.constraints.half_line ? std::max(problem.constraints.half_line->lower, 1.0) : 1.0;
    } else {
      warm.x = *warm_start;
    }
  }
  return engine.solve(problem.objective, &warm);
}

ConicSolution solve_lp(const Eigen::Ref<const Vector>& c, const Constraints& constraints,
                       const Tolerances& tolerances, Backend backend) {
  Engine engine(constraints, tolerances, backend);
  ConicSolution sol = engine.solve(Objective{0.0, c});
  if (sol.status != Status::unbounded) sol.objective = c.dot(sol.point);
  return sol;
}

}  // namespace qratio::conic
