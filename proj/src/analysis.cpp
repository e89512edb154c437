#include "qratio/analysis.hpp"

#include "parallel.hpp"
#include "qratio/sparsity.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qratio {
namespace {

conic::Constraints kernel_constraints(const Matrix& a) {
  conic::Constraints c;
  c.dimension = a.cols();
  c.residual = conic::ResidualBall{a, Vector::Zero(a.rows()), 0.0};
  c.l1_ball = conic::L1Ball{1.0, {}};
  return c;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()[0];
}

struct CcpRun {
  Vector h;
  double ratio = kInfinity;
  int iterations = 0;
};

CcpRun kernel_ccp_run(const conic::Engine& engine, const NormOrder& q, Vector h, const KernelOptions& o) {
  CcpRun run;
  conic::WarmStart warm;
  double value = lq_norm(h, q);
  for (int it = 0; it < o.max_iterations; ++it) {
    const conic::ConicSolution sol = engine.solve(conic::Objective{0.0, lq_subgradient(h, q)}, &warm);
    ++run.iterations;
    if (sol.status != conic::Status::optimal && sol.status != conic::Status::max_iterations) break;
    const double next = lq_norm(sol.point, q);
    if (!(next >= value - 1e-12 * std::max(value, 1.0))) break;
    const double change = std::abs(next - value) / std::max(value, 1e-12);
    h = sol.point;
    value = next;
    if (change < o.tolerance) break;
  }
  if (value > 0.0) {
    run.ratio = l1_norm(h) / value;
    run.h = h / l1_norm(h);
  }
  return run;
}

// argmax h_i over { Ah = 0, ||h||_1 <= 1 } for every i; empty entries
// where the program did not finish.
std::vector<Vector> coordinate_maximizers(const conic::Engine& engine, Index n) {
  std::vector<Vector> out(n);
  conic::WarmStart warm;
  for (Index i = 0; i < n; ++i) {
    const conic::ConicSolution sol = engine.solve(conic::Objective{0.0, Vector::Unit(n, i)}, &warm);
    if (sol.status == conic::Status::optimal) out[i] = sol.point;
  }
  return out;
}

double lq_gradient_step_value(const Matrix& a, const Vector& z, const NormOrder& q) {
  const double d = lq_norm(z, q);
  return d > 0.0 ? (a * z).norm() / d : kInfinity;
}

// Blend of w with its floor(s)-term truncation, pushed towards the
// truncation until s_q <= s, normalized to ||.||_q = 1.
Vector project_level(const Vector& w, const NormOrder& q, double s) {
  const double nw = lq_norm(w, q);
  if (!(nw > 0.0)) return w;
  Vector z = w / nw;
  if (q_ratio_sparsity(z, q).value <= s) return z;
  const Index keep = std::max<Index>(1, static_cast<Index>(std::floor(s)));
  std::vector<Index> order(z.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return std::abs(z[i]) > std::abs(z[j]); });
  Vector trunc = Vector::Zero(z.size());
  for (Index r = 0; r < keep && r < z.size(); ++r) trunc[order[r]] = z[order[r]];
  double lo = 0.0;
  double hi = 1.0;
  for (int b = 0; b < 40; ++b) {
    const double mid = 0.5 * (lo + hi);
    const Vector cand = trunc + mid * (z - trunc);
    if (q_ratio_sparsity(cand, q).value <= s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Vector out = trunc + lo * (z - trunc);
  return out / lq_norm(out, q);
}

struct CmsvRun {
  Vector z;
  double value = kInfinity;
};

CmsvRun cmsv_run(const Matrix& a, const NormOrder& q, double s, Vector z, int iterations) {
  z = project_level(z, q, s);
  double f = lq_gradient_step_value(a, z, q);
  double step = 1.0;
  for (int it = 0; it < iterations && f > 0.0; ++it) {
    const Vector az = a * z;
    const double naz = az.norm();
    const Vector grad = a.transpose() * az / naz - naz * lq_subgradient(z, q);
    const double gnorm = grad.norm();
    if (!(gnorm > 1e-14)) break;
    bool improved = false;
    while (step > 1e-12) {
      const Vector cand = project_level(z - (step / gnorm) * grad, q, s);
      const double fc = lq_gradient_step_value(a, cand, q);
      if (fc < f) {
        const double gain = f - fc;
        z = cand;
        f = fc;
        improved = true;
        step = std::min(step * 2.0, 1.0);
        if (gain <= 1e-14 * f) step = 0.0;
        break;
      }
      step *= 0.5;
    }
    if (!improved || step <= 1e-12) break;
  }
  return {z, f};
}

}  // namespace

Matrix kernel_basis(const Matrix& a) {
  const Index n = a.cols();
  if (a.rows() == 0) return Matrix::Identity(n, n);
  const double scale = spectral_norm(a);
  if (!(scale > 0.0)) return Matrix::Identity(n, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  Index rank = 0;
  const Index diag = std::min(qr.matrixQR().rows(), qr.matrixQR().cols());
  for (Index i = 0; i < diag; ++i) {
    if (std::abs(qr.matrixQR()(i, i)) > 1e-10 * scale) ++rank;
  }
  const Matrix q = qr.householderQ();
  return q.rightCols(n - rank);
}

KernelRatio kernel_ratio_inf_linf(const Matrix& a, const conic::Tolerances& tolerances) {
  require_finite(a, "matrix");
  KernelRatio out;
  out.exact = true;
  if (kernel_basis(a).cols() == 0) return out;
  const conic::Engine engine(kernel_constraints(a), tolerances, conic::Backend::simplex);
  const std::vector<Vector> vertices = coordinate_maximizers(engine, a.cols());
  out.linear_programs = static_cast<int>(a.cols());
  double best = 0.0;
  Vector best_h;
  for (Index i = 0; i < a.cols(); ++i) {
    const Vector& h = vertices[i];
    // Strict improvement keeps the smallest index on ties.
    if (h.size() && h[i] > best + 1e-12) {
      best = h[i];
      best_h = h;
    }
  }
  if (best > 0.0) {
    out.value = l1_norm(best_h) / best_h.cwiseAbs().maxCoeff();
    out.direction = best_h / l1_norm(best_h);
  }
  return out;
}

KernelRatio kernel_ratio_inf_ccp(const Matrix& a, const NormOrder& q, const KernelOptions& o) {
  require_ratio_order(q);
  require_finite(a, "matrix");
  if (q.is_infinite()) throw InvalidArgument("kernel_ratio_inf_ccp: q must be finite");
  if (o.starts < 1) throw InvalidArgument("kernel_ratio_inf_ccp: need at least one start");
  KernelRatio out;
  const Matrix basis = kernel_basis(a);
  if (basis.cols() == 0) return out;
  if (o.vertex_starts < 0) throw InvalidArgument("kernel_ratio_inf_ccp: vertex_starts must be >= 0");
  const conic::Engine engine(kernel_constraints(a), o.conic, conic::Backend::simplex);
  std::vector<Vector> starts;
  if (o.vertex_starts > 0) {
    std::vector<Vector> vertices = coordinate_maximizers(engine, a.cols());
    out.linear_programs += static_cast<int>(a.cols());
    std::erase_if(vertices, [](const Vector& h) { return h.size() == 0 || !(l1_norm(h) > 0.0); });
    std::vector<std::pair<double, std::size_t>> rank;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      rank.emplace_back(l1_norm(vertices[i]) / lq_norm(vertices[i], q), i);
    }
    std::sort(rank.begin(), rank.end());
    for (std::size_t i = 0; i < rank.size() && static_cast<int>(i) < o.vertex_starts; ++i) {
      starts.push_back(vertices[rank[i].second] / l1_norm(vertices[rank[i].second]));
    }
  }
  const std::size_t fixed = starts.size();
  starts.resize(fixed + o.starts);
  std::vector<CcpRun> runs(starts.size());
  detail::parallel_for(runs.size(), o.threads, [&](std::size_t j) {
    Vector h = starts[j];
    if (j >= fixed) {
      Rng rng(derive_seed(o.seed, {j - fixed}));
      Vector xi(basis.cols());
      for (Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
      h = basis * xi;
      h /= l1_norm(h);
    }
    runs[j] = kernel_ccp_run(engine, q, h, o);
  });
  for (const CcpRun& r : runs) {
    out.linear_programs += r.iterations;
    if (r.ratio < out.value) {
      out.value = r.ratio;
      out.direction = r.h;
    }
  }
  return out;
}

KernelRatio kernel_ratio_inf(const Matrix& a, const NormOrder& q, const KernelOptions& options) {
  require_ratio_order(q);
  if (q.is_infinite()) return kernel_ratio_inf_linf(a, options.conic);
  return kernel_ratio_inf_ccp(a, q, options);
}

double threshold_ratio(const NormOrder& q) {
  require_ratio_order(q);
  return std::pow(2.0 / 3.0, q.sparsity_exponent());
}

double threshold_factor(const NormOrder& q) {
  require_ratio_order(q);
  return std::pow(3.0, -q.sparsity_exponent());
}

SufficientCondition sufficient_condition_check(const Matrix& a, const NormOrder& q, Index k,
                                               const KernelOptions& options) {
  if (k < 0) throw InvalidArgument("sufficient_condition_check: k must be >= 0");
  SufficientCondition out;
  out.kernel = kernel_ratio_inf(a, q, options);
  out.exact = out.kernel.exact;
  if (std::isfinite(out.kernel.value)) {
    // s_q(h) = (||h||_1 / ||h||_q)^(q/(q-1)).
    out.threshold = threshold_factor(q) * std::pow(out.kernel.value, q.sparsity_exponent());
  }
  out.holds = static_cast<double>(k) < out.threshold;
  return out;
}

CmsvEstimate cmsv_estimate(const Matrix& a, const NormOrder& q, double s, const CmsvOptions& o) {
  require_ratio_order(q);
  require_finite(a, "matrix");
  const Index n = a.cols();
  if (!(s >= 1.0) || s > static_cast<double>(n)) throw InvalidArgument("cmsv_estimate: require 1 <= s <= N");
  if (o.starts < 1) throw InvalidArgument("cmsv_estimate: need at least one start");
  const Index k = std::min<Index>(n, static_cast<Index>(std::floor(s)));
  std::vector<CmsvRun> runs(o.starts);
  detail::parallel_for(runs.size(), o.threads, [&](std::size_t j) {
    Rng rng(derive_seed(o.seed, {j}));
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
      const Index r = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[i], idx[r]);
    }
    Vector z = Vector::Zero(n);
    for (Index i = 0; i < k; ++i) z[idx[i]] = rng.normal();
    if (!(z.cwiseAbs().maxCoeff() > 0.0)) z[idx[0]] = 1.0;
    runs[j] = cmsv_run(a, q, s, z, o.iterations);
  });
  CmsvEstimate out;
  out.level = s;
  out.value = kInfinity;
  for (const CmsvRun& r : runs) {
    if (r.value < out.value) {
      out.value = r.value;
      out.minimizer = r.z;
    }
  }
  return out;
}

double exact_sparse_level(const NormOrder& q, Index k) {
  require_ratio_order(q);
  return std::pow(3.0, q.sparsity_exponent()) * static_cast<double>(k);
}

double compressible_level(const NormOrder& q, Index k, const Eigen::Ref<const Vector>& x) {
  require_ratio_order(q);
  const double e = q.dual_exponent();
  const double sq = q_ratio_sparsity(x, q).value;
  return std::pow(4.0 * std::pow(static_cast<double>(k), e) + std::pow(sq, e), q.sparsity_exponent());
}

CertificateReport theorem_bounds(const Eigen::Ref<const Vector>& x_true, const Eigen::Ref<const Vector>& x_hat,
                                 const RecoveryProblem& problem, double cmsv, Index k) {
  const NormOrder& q = problem.q();
  if (!(cmsv > 0.0)) throw InvalidArgument("theorem_bounds: cmsv must be positive");
  if (k < 1) throw InvalidArgument("theorem_bounds: k must be >= 1");
  if (x_true.size() != problem.cols() || x_hat.size() != problem.cols()) {
    throw InvalidArgument("theorem_bounds: signal length mismatch");
  }
  CertificateReport r;
  r.q = q;
  r.k = k;
  r.eta = problem.noise_bound();
  r.cmsv_estimate = cmsv;
  r.cmsv_level = exact_sparse_level(q, k);

  const Vector h = x_hat - x_true;
  r.error_q = lq_norm(h, q);
  r.error_1 = l1_norm(h);

  const double e = q.dual_exponent();
  const double kk = static_cast<double>(k);
  const double eta = problem.noise_bound();
  r.theorem1_bound_q = 2.0 * eta / cmsv;
  r.theorem1_bound_1 = 6.0 * std::pow(kk, e) * eta / cmsv;

  const double xmax = x_true.size() ? x_true.cwiseAbs().maxCoeff() : 0.0;
  double sq_term = 0.0;
  if (xmax > 0.0) {
    const double sq = q_ratio_sparsity(x_true, q).value;
    sq_term = std::pow(sq, e);
    r.c_q = compressible_level(q, k, x_true);
    r.sigma_k1 = best_k_term_error(x_true, std::min<Index>(k, x_true.size()));
    r.theorem2_components = {2.0 * eta / cmsv, std::pow(kk, -e) * r.sigma_k1};
    r.theorem2_bound_q = r.theorem2_components.first + r.theorem2_components.second;
    r.theorem2_bound_1 = (4.0 * std::pow(kk, e) + 2.0 * sq_term) * eta / cmsv +
                         (4.0 + std::pow(sq / kk, e)) * r.sigma_k1;
    if (support_size(x_true) > k) {
      r.notes.push_back("x has more than k nonzeros; only the compressible bounds apply");
    }
  } else {
    r.notes.push_back("x is zero; compressible bounds are not defined");
  }

  double on = 0.0;
  double off = 0.0;
  for (Index i = 0; i < h.size(); ++i) {
    if (std::abs(x_true[i]) > kSupportRelativeTolerance * xmax && xmax > 0.0) {
      on += std::abs(h[i]);
    } else {
      off += std::abs(h[i]);
    }
  }
  r.cone_lhs = off;
  r.cone_rhs = on + sq_term * r.error_q;
  r.notes.push_back("cmsv value is used as supplied; bounds are diagnostics unless it is a certified lower bound");
  return r;
}

RatioComparison ratio_comparison(const Matrix& a, const Eigen::Ref<const Vector>& x, const NormOrder& q,
                                 const KernelRatio& kernel, const PmOptions& pm) {
  if (x.size() != a.cols()) throw InvalidArgument("ratio_comparison: signal length mismatch");
  RatioComparison out;
  out.kernel_inf = kernel.value;
  out.kernel_exact = kernel.exact;
  if (!(x.cwiseAbs().maxCoeff() > 0.0)) {
    out.constrained_inf = kernel.value;
    return out;
  }
  const RecoveryProblem problem(a, a * x, 0.0, q);
  out.constrained_inf = pm_solve(problem, pm).objective_value;
  return out;
}

RatioComparison ratio_comparison(const Matrix& a, const Eigen::Ref<const Vector>& x, const NormOrder& q,
                                 const RatioComparisonOptions& options) {
  return ratio_comparison(a, x, q, kernel_ratio_inf(a, q, options.kernel), options.pm);
}

}  // namespace qratio
