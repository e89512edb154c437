#include "qratio/ensembles.hpp"
#include "qratio/sparsity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace qratio;

TEST(Ensembles, GaussianIsSeededAndScaled) {
  EnsembleSpec spec{EnsembleKind::gaussian, 64, 512, 1.0, 9};
  const Matrix a = gaussian_matrix(spec);
  EXPECT_EQ(a, gaussian_matrix(spec));
  spec.seed = 10;
  EXPECT_NE(a, gaussian_matrix(spec));
  // E ||a_j||^2 = 1.
  EXPECT_NEAR(a.colwise().squaredNorm().mean(), 1.0, 0.03);
  EXPECT_NEAR(a.mean(), 0.0, 0.01);
}

TEST(Ensembles, DctColumnsFollowCosineLaw) {
  for (double f : {2.0, 5.0, 10.0}) {
    const EnsembleSpec spec{EnsembleKind::oversampled_dct, 20, 60, f, 3};
    const Matrix a = dct_matrix(spec);
    const double scale = std::sqrt(20.0);
    for (Index i = 0; i < a.rows(); ++i) {
      EXPECT_NEAR(a(i, 0) * scale, 1.0, 1e-14);
      // theta_i = 2 pi w_i / F lies in [0, pi] for F >= 2.
      const double theta = std::acos(std::clamp(a(i, 1) * scale, -1.0, 1.0));
      EXPECT_LE(theta, 2.0 * std::numbers::pi / f + 1e-12);
      for (Index j = 2; j < a.cols(); ++j) EXPECT_NEAR(a(i, j) * scale, std::cos(j * theta), 1e-6);
    }
  }
}

TEST(Ensembles, CoherenceGrowsWithOversampling) {
  double prev = 0.0;
  for (double f : {1.0, 5.0, 20.0}) {
    const double mu = mutual_coherence(dct_matrix({EnsembleKind::oversampled_dct, 50, 200, f, 1}));
    EXPECT_GT(mu, prev);
    prev = mu;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(Ensembles, MutualCoherenceByHand) {
  Matrix a(2, 3);
  a << 1, 0, 1,
       0, 1, 1;
  EXPECT_NEAR(mutual_coherence(a), 1.0 / std::sqrt(2.0), 1e-15);
  a.col(1).setZero();
  EXPECT_NEAR(mutual_coherence(a), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Ensembles, Validation) {
  EXPECT_THROW(validate(EnsembleSpec{EnsembleKind::gaussian, 0, 10, 1.0, 0}), InvalidArgument);
  EXPECT_THROW(validate(EnsembleSpec{EnsembleKind::oversampled_dct, 5, 10, 0.0, 0}), InvalidArgument);
  EXPECT_TRUE(validate(EnsembleSpec{EnsembleKind::gaussian, 5, 10, 1.0, 0}).empty());
  EXPECT_EQ(validate(EnsembleSpec{EnsembleKind::gaussian, 20, 10, 1.0, 0}).size(), 1u);
  EXPECT_EQ(parse_ensemble_kind("dct"), EnsembleKind::oversampled_dct);
  EXPECT_EQ(parse_ensemble_kind(to_string(EnsembleKind::gaussian)), EnsembleKind::gaussian);
  EXPECT_THROW(parse_ensemble_kind("bernoulli"), InvalidArgument);
}

TEST(Ensembles, SparseSignal) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GroundTruth g = sparse_signal(100, 7, seed);
    EXPECT_EQ(g.sparsity, 7);
    ASSERT_EQ(g.support.size(), 7u);
    EXPECT_TRUE(std::is_sorted(g.support.begin(), g.support.end()));
    EXPECT_EQ(support_size(g.signal), 7);
    for (Index i : g.support) EXPECT_NE(g.signal[i], 0.0);
  }
  EXPECT_EQ(sparse_signal(10, 10, 1).sparsity, 10);
  EXPECT_THROW(sparse_signal(10, 11, 1), InvalidArgument);
  EXPECT_THROW(sparse_signal(10, 0, 1), InvalidArgument);
}

TEST(Ensembles, SupportIsUniform) {
  std::vector<int> hits(10, 0);
  for (std::uint64_t s = 0; s < 5000; ++s)
    for (Index i : sparse_signal(10, 3, s).support) ++hits[i];
  for (int h : hits) EXPECT_NEAR(h / 5000.0, 0.3, 0.03);
}

TEST(Ensembles, CompressibleAndNoise) {
  const Vector x = compressible_signal(5, 2.0);
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[4], 1.0 / 25.0);
  const Vector e = gaussian_noise(20000, 0.1, 4);
  EXPECT_NEAR(e.norm() / std::sqrt(20000.0), 0.1, 0.002);
  EXPECT_EQ(gaussian_noise(5, 0.0, 4), Vector::Zero(5));
  EXPECT_THROW(gaussian_noise(5, -1.0, 4), InvalidArgument);
}
