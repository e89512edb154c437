#include "backends.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace qratio::conic {
namespace {

constexpr double kRelaxation = 1.6;
constexpr int kCheckEvery = 10;
constexpr int kRhoEvery = 50;

double spectral_norm(const Matrix& a) {
  const Matrix gram = a.rows() <= a.cols() ? Matrix(a * a.transpose()) : Matrix(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 0.0));
}

// min_z ||A z - y||_2 via a rank-revealing factorization.
double least_residual(const Matrix& a, const Vector& y) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  cod.setThreshold(1e-10);
  const Vector z = cod.solve(y);
  return (a * z - y).norm();
}

double inf_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

Vector soft_threshold(const Vector& w, double tau) {
  if (tau <= 0.0) return w;
  return w.unaryExpr([tau](double x) {
    if (x > tau) return x - tau;
    if (x < -tau) return x + tau;
    return 0.0;
  });
}

}  // namespace

AdmmBackend::AdmmBackend(const Constraints& constraints, const Tolerances& tolerances)
    : cons_(constraints), tol_(tolerances) {
  dim_ = cons_.dimension;
  has_t_ = cons_.has_scale();
  n_ = dim_ + (has_t_ ? 1 : 0);

  Index off = dim_;
  if (has_t_) off_t_ = off++;
  if (cons_.bounds) {
    off_box_ = off;
    off += dim_;
  }

  std::vector<Eigen::RowVectorXd> eq_rows;
  std::vector<double> eq_rhs;
  double data = 0.0;

  if (cons_.residual) {
    const auto& r = *cons_.residual;
    const double sigma = std::max(spectral_norm(r.matrix), 1e-300);
    data = std::max(data, r.center.lpNorm<Eigen::Infinity>());
    if (least_residual(r.matrix, r.center) > r.radius + 1e-9 * (1.0 + r.center.norm())) {
      infeasible_ = true;
    }
    if (r.radius > 0.0) {
      ball_a_ = r.matrix / sigma;
      ball_center_ = r.center / sigma;
      ball_radius_ = r.radius / sigma;
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(ball_a_);
      cod.setThreshold(1e-10);
      ball_null_ = Matrix::Identity(dim_, dim_) - cod.pseudoInverse() * ball_a_;
      off_ball_ = off;
      off += r.matrix.rows();
    } else {
      for (Index i = 0; i < r.matrix.rows(); ++i) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_);
        row.head(dim_) = r.matrix.row(i) / sigma;
        eq_rows.push_back(row);
        eq_rhs.push_back(r.center[i] / sigma);
      }
    }
  }
  if (cons_.scaled_residual) {
    const auto& s = *cons_.scaled_residual;
    const double sigma = std::max(spectral_norm(s.matrix), 1e-300);
    if (least_residual(s.matrix, s.measurements) > s.eta + 1e-9 * (1.0 + s.measurements.norm())) {
      infeasible_ = true;
    }
    soc_a_ = s.matrix / sigma;
    soc_y_ = s.measurements / sigma;
    soc_eta_ = s.eta / sigma;
    if (s.eta > 0.0) {
      off_soc_ = off;
      off += s.matrix.rows() + 1;
    } else {
      for (Index i = 0; i < s.matrix.rows(); ++i) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_);
        row.head(dim_) = soc_a_.row(i);
        row[dim_] = -soc_y_[i];
        eq_rows.push_back(row);
        eq_rhs.push_back(0.0);
      }
    }
  }
  z_size_ = off;
  if (cons_.l1_ball) data = std::max(data, cons_.l1_ball->radius);
  if (cons_.half_line) data = std::max(data, cons_.half_line->lower);
  data_scale_ = 1.0 + data;

  // K = M^T M assembled blockwise.
  Matrix k = Matrix::Zero(n_, n_);
  k.topLeftCorner(dim_, dim_).diagonal().setOnes();
  if (has_t_) k(dim_, dim_) += 1.0;
  if (off_box_ >= 0) k.topLeftCorner(dim_, dim_).diagonal().array() += 1.0;
  if (off_ball_ >= 0) k.topLeftCorner(dim_, dim_) += ball_a_.transpose() * ball_a_;
  if (off_soc_ >= 0) {
    k.topLeftCorner(dim_, dim_) += soc_a_.transpose() * soc_a_;
    const Vector cross = -soc_a_.transpose() * soc_y_;
    k.block(0, dim_, dim_, 1) += cross;
    k.block(dim_, 0, 1, dim_) += cross.transpose();
    k(dim_, dim_) += soc_y_.squaredNorm() + soc_eta_ * soc_eta_;
  }
  Eigen::LLT<Matrix> llt(k);
  const Matrix k_inv = llt.solve(Matrix::Identity(n_, n_));

  if (eq_rows.empty()) {
    projector_ = k_inv;
    offset_ = Vector::Zero(n_);
    return;
  }
  const Index p = static_cast<Index>(eq_rows.size());
  Matrix e(p, n_);
  Vector rhs(p);
  for (Index i = 0; i < p; ++i) {
    e.row(i) = eq_rows[i];
    rhs[i] = eq_rhs[i];
  }
  const Matrix w = k_inv * e.transpose();
  const Matrix s = e * w;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(s);
  cod.setThreshold(1e-12);
  const Matrix s_pinv = cod.pseudoInverse();
  projector_ = k_inv - w * s_pinv * w.transpose();
  offset_ = w * (s_pinv * rhs);
  if ((e * offset_ - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) infeasible_ = true;
}

Vector AdmmBackend::apply_m(const Vector& x) const {
  Vector z(z_size_);
  const auto v = x.head(dim_);
  z.head(dim_) = v;
  const double t = has_t_ ? x[dim_] : 1.0;
  if (off_t_ >= 0) z[off_t_] = t;
  if (off_box_ >= 0) z.segment(off_box_, dim_) = v;
  if (off_ball_ >= 0) z.segment(off_ball_, ball_a_.rows()).noalias() = ball_a_ * v;
  if (off_soc_ >= 0) {
    const Index m = soc_a_.rows();
    z.segment(off_soc_, m).noalias() = t * soc_y_ - soc_a_ * v;
    z[off_soc_ + m] = soc_eta_ * t;
  }
  return z;
}

Vector AdmmBackend::apply_mt(const Vector& w) const {
  Vector x = Vector::Zero(n_);
  x.head(dim_) = w.head(dim_);
  if (off_t_ >= 0) x[dim_] += w[off_t_];
  if (off_box_ >= 0) x.head(dim_) += w.segment(off_box_, dim_);
  if (off_ball_ >= 0) x.head(dim_).noalias() += ball_a_.transpose() * w.segment(off_ball_, ball_a_.rows());
  if (off_soc_ >= 0) {
    const Index m = soc_a_.rows();
    const auto wu = w.segment(off_soc_, m);
    x.head(dim_).noalias() -= soc_a_.transpose() * wu;
    x[dim_] += soc_y_.dot(wu) + soc_eta_ * w[off_soc_ + m];
  }
  return x;
}

Vector AdmmBackend::prox(const Vector& w, double l1_shrink) const {
  Vector z(z_size_);
  Vector v = soft_threshold(w.head(dim_), l1_shrink);
  if (cons_.l1_ball) v = project_l1_ball(v, cons_.l1_ball->radius, cons_.l1_ball->nonnegative);
  z.head(dim_) = v;
  if (off_t_ >= 0) {
    const double lower = cons_.half_line ? cons_.half_line->lower : 0.0;
    z[off_t_] = std::max(w[off_t_], lower);
  }
  if (off_box_ >= 0) {
    z.segment(off_box_, dim_) =
        w.segment(off_box_, dim_).cwiseMax(cons_.bounds->lower).cwiseMin(cons_.bounds->upper);
  }
  if (off_ball_ >= 0) {
    z.segment(off_ball_, ball_a_.rows()) =
        project_ball(w.segment(off_ball_, ball_a_.rows()), ball_center_, ball_radius_);
  }
  if (off_soc_ >= 0) {
    const Index m = soc_a_.rows();
    auto [u, s] = project_soc(w.segment(off_soc_, m), w[off_soc_ + m]);
    z.segment(off_soc_, m) = u;
    z[off_soc_ + m] = s;
  }
  return z;
}

std::optional<Vector> AdmmBackend::descent_ray(const Vector& d, double lambda, const Vector& c) const {
  constexpr double kTol = 1e-9;
  Vector u = d;
  if (off_ball_ >= 0) u.head(dim_) = ball_null_ * d.head(dim_);
  const double norm = u.norm();
  if (!(norm > 0.0)) return std::nullopt;
  u /= norm;
  const auto v = u.head(dim_);
  if (lambda * v.lpNorm<1>() - c.head(dim_).dot(v) > -1e-6 * (1.0 + lambda + inf_norm(c))) return std::nullopt;
  if (cons_.l1_ball && v.lpNorm<1>() > kTol) return std::nullopt;
  if (cons_.bounds && v.norm() > kTol) return std::nullopt;
  if (off_t_ >= 0 && u[dim_] < -kTol) return std::nullopt;
  if (has_t_ && cons_.scaled_residual) {
    const Vector w = u[dim_] * soc_y_ - soc_a_ * v;
    if (w.norm() > soc_eta_ * u[dim_] + kTol) return std::nullopt;
  }
  if (cons_.residual && off_ball_ < 0) {
    const auto& a = cons_.residual->matrix;
    if ((a * v).norm() > 1e-8 * (1.0 + a.lpNorm<Eigen::Infinity>())) return std::nullopt;
  }
  return u;
}

ConicSolution AdmmBackend::solve(const Objective& objective, WarmStart* warm) const {
  ConicSolution out;
  out.backend = Backend::admm;
  if (infeasible_) {
    out.status = Status::infeasible;
    out.point = Vector::Zero(dim_);
    return out;
  }
  const double lambda = objective.l1_weight;
  Vector c = Vector::Zero(n_);
  c.head(dim_) = objective.linear;
  const double c_norm = inf_norm(c);

  Vector x, z, u;
  double rho = 1.0;
  if (warm && warm->x.size() == n_ && warm->z.size() == z_size_ && warm->u.size() == z_size_ &&
      warm->rho > 0.0) {
    x = warm->x;
    z = warm->z;
    u = warm->u;
    rho = warm->rho;
  } else {
    x = (warm && warm->x.size() == n_) ? warm->x : offset_;
    z = prox(apply_m(x), 0.0);
    u = Vector::Zero(z_size_);
  }
  const double start_scale = 1.0 + inf_norm(x);

  Vector x_prev = x;
  Vector x_mark = x;
  std::optional<Vector> ray;
  int ray_hits = 0;
  out.status = Status::max_iterations;
  double prim = 0.0, dual = 0.0, eps_prim = 0.0;
  int it = 0;
  for (; it < tol_.max_iterations; ++it) {
    x_prev = x;
    x.noalias() = projector_ * (apply_mt(z - u) + c / rho);
    x += offset_;
    const Vector mx = apply_m(x);
    const Vector relaxed = kRelaxation * mx + (1.0 - kRelaxation) * z;
    const Vector z_old = z;
    z = prox(relaxed + u, lambda / rho);
    u += relaxed - z;

    const bool check = (it + 1) % kCheckEvery == 0;
    if (!check) continue;
    prim = inf_norm(mx - z);
    dual = rho * inf_norm(apply_mt(z - z_old));
    const double mu_norm = rho * inf_norm(apply_mt(u));
    const double primal_scale = std::max(inf_norm(mx), inf_norm(z));
    const double dual_scale = std::max({mu_norm, c_norm, lambda});
    eps_prim = tol_.feasibility * data_scale_ + tol_.objective * primal_scale;
    const double eps_dual = tol_.feasibility + tol_.objective * dual_scale;
    if (prim <= eps_prim && dual <= eps_dual) {
      out.status = Status::optimal;
      ++it;
      break;
    }
    // Drift along a feasible descent direction in three consecutive
    // 50-iteration windows counts as unbounded.
    if ((it + 1) % kRhoEvery == 0) {
      const Vector drift = x - x_mark;
      x_mark = x;
      ray = drift.norm() > 1e-6 * (1.0 + x.norm()) ? descent_ray(drift, lambda, c) : std::nullopt;
      ray_hits = ray ? ray_hits + 1 : 0;
    }
    if (ray_hits >= 3 || inf_norm(x) > 1e10 * start_scale) {
      out.status = Status::unbounded;
      Vector step = ray_hits >= 3 ? *ray : Vector(x - x_prev);
      const double norm = step.norm();
      out.ray = step.head(dim_) / (norm > 0 ? norm : 1.0);
      out.ray_scale = has_t_ ? step[dim_] / (norm > 0 ? norm : 1.0) : 0.0;
      ++it;
      break;
    }
    if (rho * inf_norm(u) > 1e12 * (1.0 + c_norm) * data_scale_) {
      out.status = Status::infeasible;
      ++it;
      break;
    }
    if ((it + 1) % kRhoEvery == 0) {
      const double p_rel = prim / std::max(primal_scale, 1e-30);
      const double d_rel = dual / std::max(dual_scale, 1e-30);
      if (p_rel > 0.0 && d_rel > 0.0) {
        const double ratio = std::sqrt(p_rel / d_rel);
        if (ratio > 5.0 || ratio < 0.2) {
          const double next = std::clamp(rho * ratio, 1e-4, 1e4);
          u *= rho / next;
          rho = next;
        }
      }
    }
  }
  if (out.status == Status::max_iterations && prim > 1e3 * eps_prim) out.status = Status::infeasible;

  out.iterations = it;
  out.point = x.head(dim_);
  out.scale = has_t_ ? x[dim_] : 1.0;
  out.objective = lambda * l1_norm(out.point) - objective.linear.dot(out.point);
  out.primal_residual = constraint_violation(cons_, out.point, out.scale);
  out.dual_residual = dual;
  if (warm) {
    warm->x = x;
    warm->z = z;
    warm->u = u;
    warm->rho = rho;
  }
  return out;
}

}  // namespace qratio::conic
