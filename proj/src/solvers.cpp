#include "qratio/solvers.hpp"

#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <limits>

namespace qratio {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool zero_is_feasible(const RecoveryProblem& p) {
  return p.measurements().norm() <= p.noise_bound();
}

Termination from_status(conic::Status s) {
  switch (s) {
    case conic::Status::optimal: return Termination::converged;
    case conic::Status::infeasible: return Termination::infeasible;
    default: return Termination::max_iterations;
  }
}

// Pulls a point whose residual exceeds eta by solver round-off back onto the
// residual ball along the least-squares correction.
Vector restore_feasibility(const RecoveryProblem& p, const Vector& x) {
  const Vector r = p.matrix() * x - p.measurements();
  const double norm = r.norm();
  if (norm <= p.noise_bound()) return x;
  const double shrink = 1.0 - p.noise_bound() / norm;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(p.matrix());
  cod.setThreshold(1e-10);
  const Vector candidate = x - cod.solve(Vector(shrink * r));
  return p.residual_norm(candidate) < norm ? candidate : x;
}

// The normalized problem fixes z only up to scale when eta > 0; pick the
// scale that best fits the measurements. The ratio does not change.
Vector fit_scale(const RecoveryProblem& p, const Vector& x) {
  const Vector ax = p.matrix() * x;
  const double denom = ax.squaredNorm();
  if (denom <= 0.0) return x;
  const double s = ax.dot(p.measurements()) / denom;
  if (!(s > 0.0) || !std::isfinite(s)) return x;
  const Vector scaled = s * x;
  return p.residual_norm(scaled) <= p.residual_norm(x) ? scaled : x;
}

SolveReport zero_report(const RecoveryProblem& p, std::string method, Clock::time_point start) {
  SolveReport r;
  r.method = std::move(method);
  r.solution = Vector::Zero(p.cols());
  r.objective_value = 0.0;
  r.residual_norm = p.residual_norm(r.solution);
  r.termination = Termination::degenerate_zero;
  r.notes.push_back("measurements lie within eta of zero; ratio undefined at the feasible point 0");
  r.wall_time = seconds_since(start);
  return r;
}

void finish(SolveReport& r, const RecoveryProblem& p, Vector x, Clock::time_point start) {
  if (x.size() != p.cols()) x = Vector::Zero(p.cols());
  r.solution = std::move(x);
  r.objective_value = norm_ratio(r.solution, p.q());
  r.residual_norm = p.residual_norm(r.solution);
  r.wall_time = seconds_since(start);
}

double q_objective(const Vector& x, double lambda, const NormOrder& q) {
  return lambda * l1_norm(x) - lq_norm(x, q);
}

// Restart points: x plus a random kernel direction of log-normal length
// relative to ||x||_2, so feasibility of x is preserved.
class KernelSampler {
 public:
  explicit KernelSampler(const Matrix& a) : a_(a), cod_(a) { cod_.setThreshold(1e-10); }

  Vector perturb(Rng& rng, const Vector& x) const {
    Vector xi(a_.cols());
    for (Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
    const Vector dir = xi - cod_.solve(Vector(a_ * xi));
    const double norm = dir.norm();
    if (!(norm > 1e-12 * xi.norm())) return x;
    const double length = std::max(x.norm(), 1e-300) * std::exp(rng.normal());
    return x + (length / norm) * dir;
  }

 private:
  const Matrix& a_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_;
};

struct BpdnResult {
  conic::ConicSolution sol;
  Vector x;
};

BpdnResult run_bpdn(const RecoveryProblem& p, const conic::Engine& engine) {
  BpdnResult out;
  out.sol = engine.solve(conic::Objective{1.0, Vector::Zero(p.cols())});
  out.x = out.sol.point;
  if (out.sol.status != conic::Status::infeasible) out.x = restore_feasibility(p, out.x);
  return out;
}

}  // namespace

conic::Constraints residual_constraints(const RecoveryProblem& p) {
  conic::Constraints c;
  c.dimension = p.cols();
  c.residual = conic::ResidualBall{p.matrix(), p.measurements(), p.noise_bound()};
  return c;
}

conic::Constraints normalized_constraints(const RecoveryProblem& p, double t0) {
  conic::Constraints c;
  c.dimension = p.cols();
  c.scaled_residual = conic::ScaledResidualCone{p.matrix(), p.measurements(), p.noise_bound()};
  c.l1_ball = conic::L1Ball{1.0, {}};
  c.half_line = conic::HalfLine{t0};
  return c;
}

Vector lq_subgradient(const Eigen::Ref<const Vector>& v, const NormOrder& q) {
  require_ratio_order(q);
  const double vmax = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (!(vmax > 0.0)) throw InvalidArgument("subgradient undefined at zero");
  Vector g = Vector::Zero(v.size());
  if (q.is_infinite()) {
    for (Index j = 0; j < v.size(); ++j) {
      if (std::abs(v[j]) == vmax) {
        g[j] = v[j] > 0 ? 1.0 : -1.0;
        break;
      }
    }
    return g;
  }
  const double norm = lq_norm(v, q);
  const double e = q.value() - 1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double mag = std::pow(std::abs(v[i]) / norm, e);
    g[i] = v[i] > 0 ? mag : -mag;
  }
  return g;
}

namespace {

QSolution dca_chain(const RecoveryProblem& p, double lambda, const DcaOptions& options,
                    Vector x, const conic::Engine& engine, conic::WarmStart& warm) {
  const Index n = p.cols();
  const bool inexact = engine.backend() == conic::Backend::admm;
  QSolution out;
  bool feasible_point = false;
  for (int k = 0; k < options.max_iterations; ++k) {
    const bool at_zero = x.cwiseAbs().maxCoeff() == 0.0;
    const Vector g = at_zero ? Vector::Zero(n) : lq_subgradient(x, p.q());
    const conic::ConicSolution sol = engine.solve(conic::Objective{lambda, g}, &warm);
    ++out.iterations;
    if (sol.status == conic::Status::infeasible) {
      out.termination = Termination::infeasible;
      out.x = x;
      out.f_value = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    if (sol.status == conic::Status::unbounded) {
      out.ray = sol.ray;
      out.x = sol.point;
      out.f_value = -std::numeric_limits<double>::infinity();
      out.termination = Termination::converged;
      return out;
    }
    const Vector next = sol.point;
    const double step = (next - x).norm() / std::max(x.norm(), 1.0);
    x = next;
    feasible_point = true;
    const double f = q_objective(x, lambda, p.q());
    const bool stalled = inexact && !out.trace.empty() &&
                         out.trace.back() - f <= 10.0 * options.conic.objective * (1.0 + std::abs(f));
    out.trace.push_back(f);
    if (step < options.step_tolerance || stalled) {
      out.termination = Termination::converged;
      break;
    }
  }
  if (!feasible_point) out.termination = Termination::max_iterations;
  out.x = x;
  out.f_value = q_objective(x, lambda, p.q());
  return out;
}

}  // namespace

QSolution dca_solve_Q(const RecoveryProblem& p, double lambda, const DcaOptions& options,
                      const Vector* start, const conic::Engine* engine) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be >= 0");
  if (options.restarts < 0) throw InvalidArgument("restart count must be >= 0");
  std::optional<conic::Engine> own;
  if (!engine) {
    own.emplace(residual_constraints(p), options.conic);
    engine = &*own;
  }
  Vector x0 = start ? *start : Vector::Zero(p.cols());
  if (x0.size() != p.cols()) throw InvalidArgument("DCA start has wrong length");
  conic::WarmStart warm;
  QSolution best = dca_chain(p, lambda, options, std::move(x0), *engine, warm);
  if (best.termination == Termination::infeasible || best.ray || options.restarts == 0) return best;
  const KernelSampler sampler(p.matrix());
  const Vector center = best.x;
  int total = best.iterations;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(r)}));
    conic::WarmStart alt_warm = warm;
    QSolution alt = dca_chain(p, lambda, options, sampler.perturb(rng, center), *engine, alt_warm);
    total += alt.iterations;
    if (alt.termination == Termination::infeasible) continue;
    if (alt.ray || alt.f_value < best.f_value - 1e-12 * (1.0 + std::abs(best.f_value))) {
      best = std::move(alt);
      if (best.ray) break;
    }
  }
  best.iterations = total;
  return best;
}

SolveReport pm_solve(const RecoveryProblem& p, const PmOptions& options, ParametricState* state) {
  const auto start = Clock::now();
  if (!(options.delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (zero_is_feasible(p)) return zero_report(p, "pm", start);
  SolveReport report;
  report.method = "pm";

  const conic::Engine engine(residual_constraints(p), options.dca.conic);
  const BpdnResult bpdn = run_bpdn(p, engine);
  if (bpdn.sol.status == conic::Status::infeasible) {
    report.termination = Termination::infeasible;
    finish(report, p, bpdn.x, start);
    return report;
  }
  Vector x = bpdn.x;
  double lambda = lq_norm(x, p.q()) / l1_norm(x);
  ParametricState st;
  st.delta = options.delta;
  bool monotone = true;
  report.termination = Termination::max_iterations;

  for (int outer = 0; outer < options.max_outer_iterations; ++outer) {
    ++report.outer_iterations;
    // The first Q(lambda) runs from x0 = 0; later ones continue from the
    // previous iterate, which keeps F(lambda) <= 0.
    DcaOptions dca = options.dca;
    dca.seed = derive_seed(options.dca.seed, {static_cast<std::uint64_t>(outer)});
    QSolution qs = outer == 0 ? dca_solve_Q(p, lambda, dca, nullptr, &engine)
                              : dca_solve_Q(p, lambda, dca, &x, &engine);
    report.inner_iterations += qs.iterations;
    if (qs.termination == Termination::infeasible) {
      report.termination = Termination::infeasible;
      break;
    }
    if (qs.ray) {
      // F(lambda) = -inf: move far along the recession direction, whose
      // ratio already beats lambda.
      const Vector& d = *qs.ray;
      const double push = 1e3 * (1.0 + l1_norm(qs.x)) / std::max(l1_norm(d), 1e-300);
      qs.x += push * d;
      qs.f_value = q_objective(qs.x, lambda, p.q());
      report.notes.push_back("Q(lambda) unbounded at lambda=" + std::to_string(lambda));
    }
    st.history.emplace_back(lambda, qs.f_value);
    report.objective_trace.push_back(l1_norm(qs.x) / lq_norm(qs.x, p.q()));

    x = qs.x;
    if (std::abs(qs.f_value) <= options.delta) {
      report.termination = Termination::converged;
      break;
    }
    const double next = lq_norm(x, p.q()) / l1_norm(x);
    if (next < lambda * (1.0 - 1e-12)) monotone = false;
    lambda = next;
  }

  st.lambda = lambda;
  st.iterate = x;
  st.f_value = st.history.empty() ? 0.0 : st.history.back().second;
  report.lambda_history = st.history;
  if (report.termination != Termination::infeasible) {
    x = restore_feasibility(p, x);
    if (!monotone) report.termination = Termination::non_monotone;
  }
  if (state) *state = st;
  finish(report, p, x, start);
  return report;
}

namespace {

struct Chain {
  Vector v;
  double t = 0.0;
  double value = -1.0;
  std::vector<double> trace;
  int iterations = 0;
  bool infeasible = false;
  bool converged = false;
};

// CCP from the linearization point v0. When v0 is feasible (with scale t0v)
// its value opens the trace; otherwise the trace starts at the first iterate.
Chain run_ccp_chain(const RecoveryProblem& p, const conic::Engine& engine, const CcpOptions& o,
                    const Vector& v0, std::optional<double> t_start, conic::WarmStart& warm) {
  Chain c;
  c.v = v0;
  c.t = t_start.value_or(0.0);
  if (t_start) {
    c.value = lq_norm(v0, p.q());
    c.trace.push_back(c.value);
  }
  for (int k = 0; k < o.max_iterations; ++k) {
    const Vector g = lq_subgradient(c.v, p.q());
    const conic::ConicSolution sol = engine.solve(conic::Objective{0.0, g}, &warm);
    ++c.iterations;
    if (sol.status == conic::Status::infeasible || sol.status == conic::Status::unbounded) {
      if (c.value < 0.0) c.infeasible = true;
      break;
    }
    const double value = lq_norm(sol.point, p.q());
    if (c.value >= 0.0 && value < c.value - 1e-9 * std::max(c.value, 1.0)) {
      // Inexact subproblem solve; keep the better point.
      c.converged = true;
      break;
    }
    const double change = c.value >= 0.0 ? std::abs(value - c.value) / std::max(c.value, 1e-12)
                                         : std::numeric_limits<double>::infinity();
    c.v = sol.point;
    c.t = sol.scale;
    c.value = std::max(value, c.value);
    c.trace.push_back(c.value);
    if (change < o.tolerance) {
      c.converged = true;
      break;
    }
  }
  return c;
}

}  // namespace

SolveReport ccp_solve(const RecoveryProblem& p, const CcpOptions& options, CcpState* state) {
  const auto start = Clock::now();
  if (!(options.cap_factor >= 1.0)) throw InvalidArgument("cap factor must be >= 1");
  if (zero_is_feasible(p)) return zero_report(p, "ccp", start);
  SolveReport report;
  report.method = "ccp";

  const BpdnResult bpdn = run_bpdn(p, conic::Engine(residual_constraints(p), options.conic));
  if (bpdn.sol.status == conic::Status::infeasible) {
    report.termination = Termination::infeasible;
    finish(report, p, bpdn.x, start);
    return report;
  }
  const double l1 = l1_norm(bpdn.x);
  const double a = options.cap_factor * l1;
  const double t0 = 1.0 / a;
  const conic::Engine engine(normalized_constraints(p, t0), options.conic);

  conic::WarmStart warm;
  Chain best = run_ccp_chain(p, engine, options, bpdn.x / l1, 1.0 / l1, warm);
  report.inner_iterations += best.iterations;
  report.outer_iterations = best.iterations;
  const KernelSampler sampler(p.matrix());
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(r)}));
    const Vector x0 = sampler.perturb(rng, best.v / best.t);
    const double x0_l1 = l1_norm(x0);
    std::optional<double> t_start;
    if (1.0 / x0_l1 >= t0 && p.residual_norm(x0) <= p.noise_bound() * (1.0 + 1e-9) + 1e-9) {
      t_start = 1.0 / x0_l1;
    }
    conic::WarmStart alt_warm = warm;
    Chain alt = run_ccp_chain(p, engine, options, x0 / x0_l1, t_start, alt_warm);
    report.inner_iterations += alt.iterations;
    if (!alt.infeasible && alt.value > best.value * (1.0 + 1e-9)) {
      report.notes.push_back("restart " + std::to_string(r) + " raised ||v||_q");
      best = std::move(alt);
      best.trace.front() = std::max(best.trace.front(), 0.0);
    }
  }
  if (best.infeasible) {
    report.termination = Termination::infeasible;
    finish(report, p, bpdn.x, start);
    return report;
  }
  report.termination = best.converged ? Termination::converged : Termination::max_iterations;
  report.objective_trace = best.trace;
  if (best.t <= t0 * (1.0 + 1e-6)) report.notes.push_back("t reached its lower bound 1/a");

  Vector x = best.v / best.t;
  if (p.noise_bound() > 0.0) x = fit_scale(p, x);
  x = restore_feasibility(p, x);
  if (state) {
    state->v = best.v;
    state->t = best.t;
    state->t0 = t0;
    state->a = a;
    state->objective_trace = best.trace;
  }
  finish(report, p, x, start);
  return report;
}

SolveReport lp_solve_linf(const RecoveryProblem& p, const LpOptions& options) {
  const auto start = Clock::now();
  if (!p.q().is_infinite()) throw InvalidArgument("the LP method requires q = inf");
  if (zero_is_feasible(p)) return zero_report(p, "lp-inf", start);
  SolveReport report;
  report.method = "lp-inf";

  const BpdnResult bpdn = run_bpdn(p, conic::Engine(residual_constraints(p), options.conic));
  if (bpdn.sol.status == conic::Status::infeasible) {
    report.termination = Termination::infeasible;
    finish(report, p, bpdn.x, start);
    return report;
  }
  const double t0 = 1.0 / (options.cap_factor * l1_norm(bpdn.x));
  const conic::Engine engine(normalized_constraints(p, t0), options.conic);
  conic::WarmStart warm;
  double best_value = -std::numeric_limits<double>::infinity();
  Vector best_v;
  double best_t = 0.0;
  bool all_exact = true;
  const Index n = p.cols();
  for (Index i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vector c = Vector::Zero(n);
      c[i] = sign;
      const conic::ConicSolution sol = engine.solve(conic::Objective{0.0, c}, &warm);
      ++report.outer_iterations;
      report.inner_iterations += sol.iterations;
      if (sol.status == conic::Status::infeasible || sol.status == conic::Status::unbounded) continue;
      if (sol.status != conic::Status::optimal) all_exact = false;
      const double value = sign * sol.point[i];
      if (value > best_value + 1e-12) {
        best_value = value;
        best_v = sol.point;
        best_t = sol.scale;
      }
    }
  }
  if (best_v.size() == 0) {
    report.termination = Termination::infeasible;
    finish(report, p, bpdn.x, start);
    return report;
  }
  report.termination = all_exact ? Termination::converged : Termination::max_iterations;
  report.objective_trace.push_back(best_value);
  Vector x = best_v / best_t;
  if (p.noise_bound() > 0.0) x = fit_scale(p, x);
  x = restore_feasibility(p, x);
  finish(report, p, x, start);
  return report;
}

SolveReport bpdn_solve(const RecoveryProblem& p, const conic::Tolerances& tolerances) {
  const auto start = Clock::now();
  SolveReport report;
  report.method = "bpdn";
  const BpdnResult bpdn = run_bpdn(p, conic::Engine(residual_constraints(p), tolerances));
  report.termination = from_status(bpdn.sol.status);
  report.outer_iterations = 1;
  report.inner_iterations = bpdn.sol.iterations;
  finish(report, p, bpdn.x, start);
  report.objective_trace.push_back(l1_norm(report.solution));
  return report;
}

SolveReport l1_minus_l2_solve(const RecoveryProblem& p, const DcaOptions& options) {
  const auto start = Clock::now();
  if (p.q().is_infinite() || p.q().value() != 2.0) {
    throw InvalidArgument("the l1-l2 baseline is defined for q = 2 only");
  }
  if (zero_is_feasible(p)) return zero_report(p, "l1l2", start);
  SolveReport report;
  report.method = "l1l2";
  const QSolution qs = dca_solve_Q(p, 1.0, options);
  report.termination = qs.termination;
  report.outer_iterations = 1;
  report.inner_iterations = qs.iterations;
  report.objective_trace = qs.trace;
  Vector x = qs.x;
  if (qs.termination != Termination::infeasible) x = restore_feasibility(p, x);
  finish(report, p, x, start);
  return report;
}

}  // namespace qratio
