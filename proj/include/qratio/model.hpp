// Core numeric types shared by every qratio module: signals, matrices, the
// norm order q, recovery problems, solve reports and the seeded RNG.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qratio {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Thrown for violated preconditions and malformed inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Order of an l_q (quasi-)norm. Infinity is a separate state rather than a
// large float so every q-dependent formula takes an explicit branch for it.
class NormOrder {
 public:
  static NormOrder finite(double q);
  static NormOrder infinity() { return NormOrder(0.0, true); }
  // Accepts "inf" / "Inf" / "infinity" or a decimal number.
  static NormOrder parse(std::string_view text);

  bool is_infinite() const { return infinite_; }
  // Throws for q = inf; callers branch on is_infinite() first.
  double value() const;
  // 1 - 1/q, equal to 1 at q = inf.
  double dual_exponent() const;
  // q / (q - 1), equal to 1 at q = inf. Requires q > 1.
  double sparsity_exponent() const;
  // True for q in (1, inf], the range every solver accepts.
  bool is_ratio_order() const { return infinite_ || q_ > 1.0; }
  std::string to_string() const;

  friend bool operator==(const NormOrder& a, const NormOrder& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.q_ == b.q_);
  }

 private:
  NormOrder(double q, bool infinite) : q_(q), infinite_(infinite) {}
  double q_;
  bool infinite_;
};

// Throws InvalidArgument unless q is in (1, inf].
void require_ratio_order(const NormOrder& q);

// Throws InvalidArgument if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& values, std::string_view what);

double l1_norm(const Eigen::Ref<const Vector>& z);
// (sum |z_i|^q)^(1/q) for q > 0, max |z_i| for q = inf. Evaluated with the
// entries rescaled by max |z_i| so large q does not overflow.
double lq_norm(const Eigen::Ref<const Vector>& z, const NormOrder& q);

// Dense product with a fixed row-by-row summation order.
Vector matvec(const Matrix& a, const Eigen::Ref<const Vector>& z);

// Measurement model of the recovery problem:
//   minimize ||z||_1 / ||z||_q  subject to  ||A z - y||_2 <= eta.
class RecoveryProblem {
 public:
  RecoveryProblem(Matrix matrix, Vector measurements, double noise_bound, NormOrder q);

  const Matrix& matrix() const { return matrix_; }
  const Vector& measurements() const { return measurements_; }
  double noise_bound() const { return noise_bound_; }
  const NormOrder& q() const { return q_; }
  Index rows() const { return matrix_.rows(); }
  Index cols() const { return matrix_.cols(); }

  double residual_norm(const Eigen::Ref<const Vector>& z) const;
  RecoveryProblem with_order(NormOrder q) const;

 private:
  Matrix matrix_;
  Vector measurements_;
  double noise_bound_;
  NormOrder q_;
};

enum class Termination {
  converged,
  max_iterations,
  infeasible,
  degenerate_zero,
  // The parametric lambda sequence decreased; the inner DCA returned a
  // subproblem solution that was not optimal.
  non_monotone,
};

std::string to_string(Termination t);

struct SolveReport {
  std::string method;
  Vector solution;
  // ||solution||_1 / ||solution||_q, 0 for the zero vector.
  double objective_value = 0.0;
  double residual_norm = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  Termination termination = Termination::max_iterations;
  double wall_time = 0.0;
  std::vector<double> objective_trace;
  // (lambda, F(lambda)) pairs for the parametric method.
  std::vector<std::pair<double, double>> lambda_history;
  std::vector<std::string> notes;
};

// ||z||_1 / ||z||_q with the zero vector mapped to 0.
double norm_ratio(const Eigen::Ref<const Vector>& z, const NormOrder& q);

// Deterministic generator. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; uniform and normal variates are
// derived here rather than through <random> distributions, whose algorithms
// are implementation-defined.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/u53/marsaglia-polar";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a master seed with a list of integers into a child seed (splitmix64
// finalizer), so each experiment cell can be regenerated on its own.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

}  // namespace qratio
