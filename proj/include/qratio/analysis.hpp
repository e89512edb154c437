// Recovery certificates: the kernel ratio infimum, the sufficient sparsity
// threshold built on it, q-ratio CMSV estimates and the error-bound
// components of the exact-sparse and compressible recovery results.
//
// Everything except kernel_ratio_inf_linf is a nonconvex search. Such values
// are upper bounds on the true infimum and carry exact = false.
#pragma once

#include "qratio/conic.hpp"
#include "qratio/model.hpp"
#include "qratio/solvers.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace qratio {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Orthonormal basis of ker(A) from a rank-revealing orthogonal factorization.
// Rank decisions use the threshold 1e-10 * ||A||_2. Zero columns if the
// kernel is trivial.
Matrix kernel_basis(const Matrix& a);

struct KernelRatio {
  // inf over ker(A) \ {0} of ||h||_1 / ||h||_q, +inf for a trivial kernel.
  double value = kInfinity;
  // Kernel vector attaining `value`, scaled to ||h||_1 = 1. Empty if trivial.
  Vector direction;
  bool exact = false;
  int linear_programs = 0;
};

// Exact for q = inf. Maximizing |h_i| over { Ah = 0, ||h||_1 <= 1 } for every
// i gives 1 / value; the sign of h_i is irrelevant because the set is
// symmetric, so N programs cover all 2N sign cases.
KernelRatio kernel_ratio_inf_linf(const Matrix& a, const conic::Tolerances& tolerances = {});

struct KernelOptions {
  // Starts drawn as h = B xi with B = kernel_basis(A) and xi standard normal.
  int starts = 50;
  // Further starts at the best, by ||h||_q, of the N vertices that maximize
  // |h_i| over the same set (the q = inf programs). 0 skips those programs.
  int vertex_starts = 10;
  int max_iterations = 100;
  double tolerance = 1e-8;
  std::uint64_t seed = 0x6b72;
  // 0 means std::thread::hardware_concurrency().
  int threads = 0;
  conic::Tolerances conic;
};

// Multi-start CCP for max ||h||_q over { Ah = 0, ||h||_1 <= 1 }, 1 < q < inf.
// Returns the best ratio found, an upper bound on the infimum.
KernelRatio kernel_ratio_inf_ccp(const Matrix& a, const NormOrder& q, const KernelOptions& options = {});

// Dispatches to the exact LP search for q = inf and to CCP otherwise.
KernelRatio kernel_ratio_inf(const Matrix& a, const NormOrder& q, const KernelOptions& options = {});

// 3^(q/(1-q)) relative to 2^(q/(1-q)), i.e. (2/3)^(q/(q-1)); 2/3 at q = inf.
double threshold_ratio(const NormOrder& q);

// 3^(q/(1-q)); 1/3 at q = inf.
double threshold_factor(const NormOrder& q);

struct SufficientCondition {
  // inf over the kernel of 3^(q/(1-q)) s_q(h); +inf for a trivial kernel.
  double threshold = kInfinity;
  bool holds = true;
  bool exact = false;
  KernelRatio kernel;
};

// k < threshold guarantees that every k-sparse x is the unique minimizer of
// the noiseless ratio problem with Az = Ax.
SufficientCondition sufficient_condition_check(const Matrix& a, const NormOrder& q, Index k,
                                               const KernelOptions& options = {});

struct CmsvOptions {
  int starts = 100;
  int iterations = 500;
  std::uint64_t seed = 0x636d;
  int threads = 0;
};

struct CmsvEstimate {
  double value = 0.0;
  double level = 1.0;
  // Best z found, ||z||_q = 1 and s_q(z) <= level.
  Vector minimizer;
  bool exact = false;
};

// Search for rho_{q,s}(A) = min ||Az||_2 / ||z||_q over s_q(z) <= s.
// Projected gradient from random floor(s)-sparse starts. The projection
// blends z with its best floor(s)-term truncation until s_q(z) <= s.
CmsvEstimate cmsv_estimate(const Matrix& a, const NormOrder& q, double s, const CmsvOptions& options = {});

// Level 3^(q/(q-1)) k used by the exact-sparse bound.
double exact_sparse_level(const NormOrder& q, Index k);

// C_q(k, x) = (4 k^(1-1/q) + s_q(x)^(1-1/q))^(q/(q-1)).
double compressible_level(const NormOrder& q, Index k, const Eigen::Ref<const Vector>& x);

struct CertificateReport {
  NormOrder q = NormOrder::infinity();
  Index k = 0;
  double eta = 0.0;

  double kernel_ratio_inf = kInfinity;
  bool kernel_ratio_exact = false;
  double sufficient_k = kInfinity;

  double cmsv_estimate = 0.0;
  double cmsv_level = 0.0;
  bool cmsv_exact = false;

  // h = x_hat - x.
  double error_q = 0.0;
  double error_1 = 0.0;

  // Exact-sparse case: 2 eta / rho and 6 k^(1-1/q) eta / rho.
  double theorem1_bound_q = 0.0;
  double theorem1_bound_1 = 0.0;

  double c_q = 0.0;
  double sigma_k1 = 0.0;
  // (2 eta / rho, k^(1/q-1) sigma_{k,1}(x)).
  std::pair<double, double> theorem2_components{0.0, 0.0};
  double theorem2_bound_q = 0.0;
  double theorem2_bound_1 = 0.0;

  // ||h_{S^c}||_1 and ||h_S||_1 + s_q(x)^(1-1/q) ||h||_q with S = supp(x).
  double cone_lhs = 0.0;
  double cone_rhs = 0.0;

  std::vector<std::string> notes;
};

// Evaluates the bound components for a recovered x_hat. `cmsv` is used as
// given; the bounds are diagnostics unless it is a certified lower bound.
CertificateReport theorem_bounds(const Eigen::Ref<const Vector>& x_true, const Eigen::Ref<const Vector>& x_hat,
                                 const RecoveryProblem& problem, double cmsv, Index k);

struct RatioComparison {
  // min ||z||_1 / ||z||_q s.t. Az = Ax (parametric method).
  double constrained_inf = 0.0;
  double kernel_inf = kInfinity;
  bool kernel_exact = false;
};

struct RatioComparisonOptions {
  PmOptions pm;
  KernelOptions kernel;
};

// With x = 0 the feasible set is the kernel and both values coincide.
RatioComparison ratio_comparison(const Matrix& a, const Eigen::Ref<const Vector>& x, const NormOrder& q,
                                 const RatioComparisonOptions& options = {});

// Variant that reuses a kernel value already computed for A.
RatioComparison ratio_comparison(const Matrix& a, const Eigen::Ref<const Vector>& x, const NormOrder& q,
                                 const KernelRatio& kernel, const PmOptions& pm = {});

}  // namespace qratio
