// q-ratio sparsity s_q(z) = exp(H_q(pi(z))), the exponential of the Renyi
// entropy of the normalized magnitude profile pi_i = |z_i| / ||z||_1.
// For q > 1 it equals (||z||_1 / ||z||_q)^(q/(q-1)); the limits are
// ||z||_0 (q = 0), the Shannon-entropy exponential (q = 1) and
// ||z||_1 / ||z||_inf (q = inf). Values lie in [1, ||z||_0].
#pragma once

#include "qratio/model.hpp"

namespace qratio {

// Relative zero threshold used by support counting: |z_i| > 1e-12 * ||z||_inf.
inline constexpr double kSupportRelativeTolerance = 1e-12;

struct SparsityValue {
  NormOrder q = NormOrder::infinity();
  double value = 0.0;
  Vector normalized_profile;
  double entropy = 0.0;
};

// Number of entries above the relative zero threshold.
Index support_size(const Eigen::Ref<const Vector>& z,
                   double relative_tolerance = kSupportRelativeTolerance);

// Throws InvalidArgument("sparsity undefined at zero") for z = 0.
SparsityValue q_ratio_sparsity(const Eigen::Ref<const Vector>& z, const NormOrder& q);

// Membership in S_{q,k} = { z : s_q(z) <= k }. Requires k >= 1 and z != 0.
bool level_set_member(const Eigen::Ref<const Vector>& z, const NormOrder& q, double k);

// sigma_{k,1}(x): l1 distance to the nearest k-sparse vector, i.e. the sum
// of the N - k smallest magnitudes. Requires 0 <= k <= N.
double best_k_term_error(const Eigen::Ref<const Vector>& x, Index k);

}  // namespace qratio
