#include "qratio/model.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace qratio {

NormOrder NormOrder::finite(double q) {
  if (!std::isfinite(q) || q < 0.0) {
    throw InvalidArgument("norm order must be a finite nonnegative number or inf");
  }
  return NormOrder(q, false);
}

NormOrder NormOrder::parse(std::string_view text) {
  std::string lowered;
  for (char c : text) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lowered == "inf" || lowered == "infinity" || lowered == "+inf") return infinity();
  double q = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, q);
  if (ec != std::errc() || ptr != last) {
    throw InvalidArgument("cannot parse norm order '" + std::string(text) + "'");
  }
  return finite(q);
}

double NormOrder::value() const {
  if (infinite_) throw InvalidArgument("value() called on q = inf");
  return q_;
}

double NormOrder::dual_exponent() const {
  if (infinite_) return 1.0;
  return 1.0 - 1.0 / q_;
}

double NormOrder::sparsity_exponent() const {
  if (infinite_) return 1.0;
  if (q_ <= 1.0) throw InvalidArgument("q/(q-1) requires q > 1");
  return q_ / (q_ - 1.0);
}

std::string NormOrder::to_string() const {
  if (infinite_) return "inf";
  // Shortest text that reads back to the same double.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, q_);
  return std::string(buf, res.ptr);
}

void require_ratio_order(const NormOrder& q) {
  if (!q.is_ratio_order()) {
    throw InvalidArgument("q must lie in (1, inf], got " + q.to_string());
  }
}

void require_finite(const Eigen::Ref<const Matrix>& values, std::string_view what) {
  if (!values.allFinite()) {
    throw InvalidArgument(std::string(what) + " contains NaN or infinite entries");
  }
}

double l1_norm(const Eigen::Ref<const Vector>& z) { return z.cwiseAbs().sum(); }

double lq_norm(const Eigen::Ref<const Vector>& z, const NormOrder& q) {
  if (z.size() == 0) return 0.0;
  const double peak = z.cwiseAbs().maxCoeff();
  if (q.is_infinite() || peak == 0.0) return peak;
  const double p = q.value();
  if (p == 0.0) throw InvalidArgument("lq_norm is undefined for q = 0");
  if (p == 1.0) return l1_norm(z);
  if (p == 2.0) return peak * (z / peak).norm();
  double sum = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    sum += std::pow(std::abs(z[i]) / peak, p);
  }
  return peak * std::pow(sum, 1.0 / p);
}

Vector matvec(const Matrix& a, const Eigen::Ref<const Vector>& z) {
  if (a.cols() != z.size()) {
    throw InvalidArgument("matvec: matrix has " + std::to_string(a.cols()) +
                          " columns but vector has length " + std::to_string(z.size()));
  }
  Vector out(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (Index j = 0; j < a.cols(); ++j) acc += a(i, j) * z[j];
    out[i] = acc;
  }
  return out;
}

RecoveryProblem::RecoveryProblem(Matrix matrix, Vector measurements, double noise_bound,
                                 NormOrder q)
    : matrix_(std::move(matrix)),
      measurements_(std::move(measurements)),
      noise_bound_(noise_bound),
      q_(q) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) {
    throw InvalidArgument("measurement matrix must be at least 1x1");
  }
  if (measurements_.size() != matrix_.rows()) {
    throw InvalidArgument("measurement vector length does not match matrix rows");
  }
  require_finite(matrix_, "measurement matrix");
  require_finite(measurements_, "measurement vector");
  if (!std::isfinite(noise_bound_) || noise_bound_ < 0.0) {
    throw InvalidArgument("noise bound eta must be finite and nonnegative");
  }
  require_ratio_order(q_);
}

double RecoveryProblem::residual_norm(const Eigen::Ref<const Vector>& z) const {
  return (matrix_ * z - measurements_).norm();
}

RecoveryProblem RecoveryProblem::with_order(NormOrder q) const {
  return RecoveryProblem(matrix_, measurements_, noise_bound_, q);
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max_iterations";
    case Termination::infeasible: return "infeasible";
    case Termination::degenerate_zero: return "degenerate_zero";
    case Termination::non_monotone: return "non_monotone";
  }
  return "unknown";
}

double norm_ratio(const Eigen::Ref<const Vector>& z, const NormOrder& q) {
  const double denom = lq_norm(z, q);
  if (denom == 0.0) return 0.0;
  return l1_norm(z) / denom;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("Rng::below(0)");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r = 0;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace qratio
