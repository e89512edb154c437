#include "qratio/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qratio {

std::string to_string(EnsembleKind kind) {
  return kind == EnsembleKind::gaussian ? "gaussian" : "dct";
}

EnsembleKind parse_ensemble_kind(const std::string& text) {
  if (text == "gaussian") return EnsembleKind::gaussian;
  if (text == "dct" || text == "oversampled_dct") return EnsembleKind::oversampled_dct;
  throw InvalidArgument("unknown ensemble kind '" + text + "' (expected gaussian or dct)");
}

std::vector<std::string> validate(const EnsembleSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw InvalidArgument("ensemble dimensions must be positive");
  if (spec.kind == EnsembleKind::oversampled_dct &&
      !(spec.oversampling > 0.0 && std::isfinite(spec.oversampling))) {
    throw InvalidArgument("DCT oversampling factor F must be positive");
  }
  std::vector<std::string> warnings;
  if (spec.m > spec.n) {
    warnings.push_back("m > N: the system is not underdetermined");
  }
  return warnings;
}

Matrix gaussian_matrix(const EnsembleSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  Matrix a(spec.m, spec.n);
  for (Index j = 0; j < spec.n; ++j)
    for (Index i = 0; i < spec.m; ++i) a(i, j) = scale * rng.normal();
  return a;
}

Matrix dct_matrix(const EnsembleSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  Vector w(spec.m);
  for (Index i = 0; i < spec.m; ++i) w[i] = rng.uniform();
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  Matrix a(spec.m, spec.n);
  for (Index j = 0; j < spec.n; ++j) {
    const double freq = 2.0 * std::numbers::pi * static_cast<double>(j) / spec.oversampling;
    for (Index i = 0; i < spec.m; ++i) a(i, j) = scale * std::cos(freq * w[i]);
  }
  return a;
}

Matrix make_matrix(const EnsembleSpec& spec) {
  return spec.kind == EnsembleKind::gaussian ? gaussian_matrix(spec) : dct_matrix(spec);
}

GroundTruth sparse_signal(Index n, Index k, std::uint64_t seed) {
  if (n < 1 || k < 1 || k > n) throw InvalidArgument("sparse_signal requires 1 <= k <= N");
  Rng rng(seed);
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[i], perm[j]);
  }
  GroundTruth truth;
  truth.support.assign(perm.begin(), perm.begin() + k);
  std::sort(truth.support.begin(), truth.support.end());
  truth.signal = Vector::Zero(n);
  for (Index idx : truth.support) {
    double v = 0.0;
    while (v == 0.0) v = rng.normal();
    truth.signal[idx] = v;
  }
  truth.sparsity = k;
  return truth;
}

Vector compressible_signal(Index n, double decay) {
  if (n < 1 || !(decay > 0.0)) throw InvalidArgument("compressible_signal requires N >= 1, p > 0");
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = std::pow(static_cast<double>(i + 1), -decay);
  return x;
}

Vector gaussian_noise(Index m, double sigma, std::uint64_t seed) {
  if (m < 1 || !(sigma >= 0.0)) throw InvalidArgument("gaussian_noise requires m >= 1, sigma >= 0");
  Rng rng(seed);
  Vector e(m);
  for (Index i = 0; i < m; ++i) e[i] = sigma * rng.normal();
  return e;
}

double mutual_coherence(const Matrix& a) {
  const Vector norms = a.colwise().norm().transpose();
  const Matrix gram = a.transpose() * a;
  double best = 0.0;
  for (Index i = 0; i < a.cols(); ++i) {
    if (norms[i] == 0.0) continue;
    for (Index j = i + 1; j < a.cols(); ++j) {
      if (norms[j] == 0.0) continue;
      best = std::max(best, std::abs(gram(i, j)) / (norms[i] * norms[j]));
    }
  }
  return best;
}

}  // namespace qratio
