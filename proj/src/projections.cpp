#include "qratio/conic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qratio::conic {

Vector project_l1_ball(const Eigen::Ref<const Vector>& z, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("l1 ball radius must be positive");
  if (l1_norm(z) <= radius) return z;

  const Index n = z.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(z[a]) > std::abs(z[b]); });

  // Largest j with |z|_(j) > (sum_{i<=j} |z|_(i) - r) / j fixes the threshold.
  double cumulative = 0.0;
  double tau = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double mag = std::abs(z[order[j]]);
    cumulative += mag;
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (mag > candidate) {
      tau = candidate;
    } else {
      break;
    }
  }
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double mag = std::max(std::abs(z[i]) - tau, 0.0);
    out[i] = std::copysign(mag, z[i]);
    if (mag == 0.0) out[i] = 0.0;
  }
  return out;
}

Vector project_l1_ball(const Eigen::Ref<const Vector>& z, double radius,
                       const std::vector<Index>& nonnegative) {
  if (nonnegative.empty()) return project_l1_ball(z, radius);
  Vector clipped = z;
  for (Index i : nonnegative) clipped[i] = std::max(clipped[i], 0.0);
  return project_l1_ball(clipped, radius);
}

std::pair<Vector, double> project_soc(const Eigen::Ref<const Vector>& u, double s) {
  const double norm_u = u.norm();
  if (norm_u <= s) return {u, s};
  if (norm_u <= -s) return {Vector::Zero(u.size()), 0.0};
  const double alpha = 0.5 * (s + norm_u);
  return {(alpha / norm_u) * u, alpha};
}

Vector project_ball(const Eigen::Ref<const Vector>& w, const Eigen::Ref<const Vector>& center,
                    double radius) {
  Vector d = w - center;
  const double norm_d = d.norm();
  if (norm_d <= radius) return w;
  if (radius <= 0.0) return center;
  return center + (radius / norm_d) * d;
}

}  // namespace qratio::conic
