#include "qratio/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qratio {
namespace {

// ln sum_i pi_i^q for a probability vector pi and finite q > 0, q != 1.
double log_power_sum(const Vector& pi, double q) {
  if (std::abs(q - 1.0) < 0.5) {
    // sum pi^q - 1 = sum pi (exp((q-1) ln pi) - 1); avoids cancellation near q = 1.
    double excess = 0.0;
    for (Index i = 0; i < pi.size(); ++i) {
      if (pi[i] > 0.0) excess += pi[i] * std::expm1((q - 1.0) * std::log(pi[i]));
    }
    return std::log1p(excess);
  }
  const double peak = pi.maxCoeff();
  double sum = 0.0;
  for (Index i = 0; i < pi.size(); ++i) {
    if (pi[i] > 0.0) sum += std::pow(pi[i] / peak, q);
  }
  return q * std::log(peak) + std::log(sum);
}

}  // namespace

Index support_size(const Eigen::Ref<const Vector>& z, double relative_tolerance) {
  if (z.size() == 0) return 0;
  const double threshold = relative_tolerance * z.cwiseAbs().maxCoeff();
  Index count = 0;
  for (Index i = 0; i < z.size(); ++i) {
    if (std::abs(z[i]) > threshold) ++count;
  }
  return count;
}

SparsityValue q_ratio_sparsity(const Eigen::Ref<const Vector>& z, const NormOrder& q) {
  require_finite(z, "signal");
  const double l1 = l1_norm(z);
  if (z.size() == 0 || l1 == 0.0) throw InvalidArgument("sparsity undefined at zero");

  SparsityValue out;
  out.q = q;
  out.normalized_profile = z.cwiseAbs() / l1;
  const Vector& pi = out.normalized_profile;

  if (q.is_infinite()) {
    out.value = l1 / z.cwiseAbs().maxCoeff();
    out.entropy = std::log(out.value);
    return out;
  }
  const double p = q.value();
  if (p == 0.0) {
    out.value = static_cast<double>(support_size(z));
    out.entropy = std::log(out.value);
  } else if (p == 1.0) {
    double h = 0.0;
    for (Index i = 0; i < pi.size(); ++i) {
      if (pi[i] > 0.0) h -= pi[i] * std::log(pi[i]);  // 0 ln 0 := 0
    }
    out.entropy = h;
    out.value = std::exp(h);
  } else if (p == 2.0) {
    // Closed form, exact for equal-magnitude entries.
    const Vector w = z.cwiseAbs() / z.cwiseAbs().maxCoeff();
    out.value = w.sum() * w.sum() / w.squaredNorm();
    out.entropy = std::log(out.value);
  } else if (p > 1.0 && std::abs(p - 1.0) >= 0.5) {
    const double log_ratio = std::log(l1) - std::log(lq_norm(z, q));
    out.entropy = (p / (p - 1.0)) * log_ratio;
    out.value = std::exp(out.entropy);
  } else {
    out.entropy = log_power_sum(pi, p) / (1.0 - p);
    out.value = std::exp(out.entropy);
  }
  return out;
}

bool level_set_member(const Eigen::Ref<const Vector>& z, const NormOrder& q, double k) {
  if (!(k >= 1.0)) throw InvalidArgument("sparsity level k must be >= 1");
  return q_ratio_sparsity(z, q).value <= k;
}

double best_k_term_error(const Eigen::Ref<const Vector>& x, Index k) {
  if (k < 0 || k > x.size()) throw InvalidArgument("k must lie in [0, N]");
  std::vector<double> mags(x.size());
  for (Index i = 0; i < x.size(); ++i) mags[i] = std::abs(x[i]);
  std::sort(mags.begin(), mags.end());
  double sum = 0.0;
  for (Index i = 0; i < x.size() - k; ++i) sum += mags[i];
  return sum;
}

}  // namespace qratio
