// Independent reference computations for the test suites. Nothing here calls
// into the library's solvers; only the basic types are shared.
#pragma once

#include "qratio/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using qratio::Index;
using qratio::Matrix;
using qratio::Vector;

inline Vector matvec(const Matrix& a, const Vector& z) {
  Vector out(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    long double s = 0.0L;
    for (Index j = 0; j < a.cols(); ++j) s += static_cast<long double>(a(i, j)) * z[j];
    out[i] = static_cast<double>(s);
  }
  return out;
}

// Plain power sums; q <= 0 means infinity.
inline double norm(const Vector& z, double q) {
  if (q <= 0.0) {
    double m = 0.0;
    for (Index i = 0; i < z.size(); ++i) m = std::max(m, std::abs(z[i]));
    return m;
  }
  long double s = 0.0L;
  for (Index i = 0; i < z.size(); ++i) s += std::pow(static_cast<long double>(std::abs(z[i])), q);
  return static_cast<double>(std::pow(s, 1.0L / q));
}

// (||z||_1 / ||z||_q)^(q/(q-1)); q <= 0 means infinity.
inline double sparsity(const Vector& z, double q) {
  const double r = norm(z, 1.0) / norm(z, q);
  return q <= 0.0 ? r : std::pow(r, q / (q - 1.0));
}

// inf over ker(A) \ {0} of ||h||_1 / ||h||_q by vertex enumeration. The
// maximum of the convex ||h||_q over { Ah = 0, ||h||_1 <= 1 } sits at a
// vertex, and every vertex is the unique (up to scale) kernel vector of
// some column subset. Exponential in N; meant for N <= 10.
inline double kernel_ratio(const Matrix& a, double q) {
  const Index n = a.cols();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j) {
      if (mask & (1u << j)) cols.push_back(j);
    }
    const Index s = static_cast<Index>(cols.size());
    Matrix sub(a.rows() + 1, s);
    sub.setZero();
    for (Index c = 0; c < s; ++c) sub.col(c).head(a.rows()) = a.col(cols[c]);
    Eigen::JacobiSVD<Matrix> svd(sub.topRows(a.rows()), Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    const double tol = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) rank += sv[i] > tol ? 1 : 0;
    if (s - rank != 1) continue;
    const Vector h_s = svd.matrixV().col(s - 1);
    // Only full-support vectors on the subset; smaller supports appear
    // under their own mask.
    if (h_s.cwiseAbs().minCoeff() <= 1e-9 * h_s.cwiseAbs().maxCoeff()) continue;
    Vector h = Vector::Zero(n);
    for (Index c = 0; c < s; ++c) h[cols[c]] = h_s[c];
    best = std::min(best, norm(h, 1.0) / norm(h, q));
  }
  return best;
}

// inf of ||z||_1 / ||z||_q over { Az = y } (y != 0) by the same vertex
// enumeration applied to { (v, t) : Av = t y, ||v||_1 <= 1, t >= 0 }, the
// homogenized feasible set. Includes the t -> 0 limit (kernel directions).
inline double affine_ratio(const Matrix& a, const Vector& y, double q, Vector* argmin = nullptr) {
  const Index n = a.cols();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j) {
      if (mask & (1u << j)) cols.push_back(j);
    }
    const Index s = static_cast<Index>(cols.size());
    Matrix sub(a.rows(), s + 1);
    for (Index c = 0; c < s; ++c) sub.col(c) = a.col(cols[c]);
    sub.col(s) = -y;
    Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    const double tol = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) rank += sv[i] > tol ? 1 : 0;
    if (s + 1 - rank != 1) continue;
    Vector w = svd.matrixV().col(s);
    if (w[s] < 0.0) w = -w;
    if (w.head(s).cwiseAbs().minCoeff() <= 1e-9 * w.head(s).cwiseAbs().maxCoeff()) continue;
    Vector h = Vector::Zero(n);
    for (Index c = 0; c < s; ++c) h[cols[c]] = w[c];
    const double r = norm(h, 1.0) / norm(h, q);
    if (r < best) {
      best = r;
      if (argmin) *argmin = w[s] > 1e-12 ? Vector(h / w[s]) : h;
    }
  }
  return best;
}

// Smallest ||Az||_2 / ||z||_q over random samples with s_q(z) <= s. Samples
// mix sparse supports of size floor(s) with heavy-tailed dense draws.
inline double cmsv_sampling(const Matrix& a, double q, double s, int samples, std::uint64_t seed) {
  qratio::Rng rng(seed);
  const Index n = a.cols();
  const Index k = static_cast<Index>(std::floor(s));
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < samples; ++t) {
    Vector z = Vector::Zero(n);
    if (t % 2 == 0) {
      for (Index i = 0; i < k; ++i) z[static_cast<Index>(rng.below(n))] = rng.normal();
    } else {
      for (Index i = 0; i < n; ++i) z[i] = rng.normal() * std::exp(3.0 * rng.normal());
    }
    if (!(z.cwiseAbs().maxCoeff() > 0.0) || sparsity(z, q) > s) continue;
    best = std::min(best, (a * z).norm() / norm(z, q));
  }
  return best;
}

// Central differences of f at x.
inline Vector gradient(const std::function<double(const Vector&)>& f, const Vector& x, double step = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector lo = x, hi = x;
    lo[i] -= step;
    hi[i] += step;
    g[i] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

// Nearest point of `set` (a membership test) to p over the lattice h Z^d
// restricted to [-half_width, half_width]^d. Callers pick h so the faces of
// the set pass through lattice points; otherwise the argmin drifts along a
// face by O(sqrt(h)).
inline Vector grid_projection(const Vector& p, const std::function<bool(const Vector&)>& set, double half_width,
                              double h) {
  const Index d = p.size();
  const int n = static_cast<int>(std::round(half_width / h));
  Vector best = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> idx(d, -n);
  Vector x(d);
  while (true) {
    for (Index i = 0; i < d; ++i) x[i] = h * idx[i];
    if (set(x)) {
      const double dist = (x - p).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = x;
      }
    }
    Index i = 0;
    while (i < d && ++idx[i] > n) idx[i++] = -n;
    if (i == d) break;
  }
  return best;
}

// The toy system and its one-parameter solution family.
inline Matrix toy_matrix() {
  Matrix a(5, 6);
  a << 1, -1, 0, 0, 0, 0,
       1, 0, -1, 0, 0, 0,
       0, 1, 1, 1, 0, 0,
       2, 2, 0, 0, 1, 0,
       1, 1, 0, 0, 0, -1;
  return a;
}

inline Vector toy_measurements() {
  Vector y(5);
  y << 0, 0, 20, 40, 18;
  return y;
}

inline Vector toy_point(double t) {
  Vector z(6);
  z << t, t, t, 20 - 2 * t, 40 - 4 * t, 2 * (t - 9);
  return z;
}

}  // namespace oracle
