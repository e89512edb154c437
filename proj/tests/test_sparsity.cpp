#include "oracles.hpp"
#include "qratio/sparsity.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qratio;

namespace {

Vector random_vector(Rng& rng, Index n) {
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = rng.normal() * std::exp(2.0 * rng.normal());
  return z;
}

}  // namespace

TEST(Sparsity, TwoEqualEntries) {
  Vector z(4);
  z << 1, 1, 0, 0;
  EXPECT_EQ(q_ratio_sparsity(z, NormOrder::finite(2.0)).value, 2.0);
  for (double q : {0.0, 0.5, 1.0, 1.5, 3.0}) {
    EXPECT_NEAR(q_ratio_sparsity(z, NormOrder::finite(q)).value, 2.0, 1e-12) << q;
  }
  EXPECT_EQ(q_ratio_sparsity(z, NormOrder::infinity()).value, 2.0);
}

TEST(Sparsity, PowerDecaySignalAtInfinity) {
  Vector x(50);
  double sum = 0.0;
  for (int i = 1; i <= 50; ++i) {
    x[i - 1] = 1.0 / (double(i) * i);
    sum += x[i - 1];
  }
  const double s = q_ratio_sparsity(x, NormOrder::infinity()).value;
  EXPECT_NEAR(s, sum, 1e-12);
  EXPECT_NEAR(s, 1.6251, 5e-4);
}

TEST(Sparsity, MatchesRatioFormula) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const Vector z = random_vector(rng, 12);
    for (double q : {1.1, 1.5, 2.0, 5.0}) {
      const double want = oracle::sparsity(z, q);
      EXPECT_NEAR(q_ratio_sparsity(z, NormOrder::finite(q)).value, want, 1e-9 * want);
    }
    EXPECT_NEAR(q_ratio_sparsity(z, NormOrder::infinity()).value, oracle::sparsity(z, 0.0), 1e-12 * 12);
  }
}

TEST(Sparsity, LimitsAtZeroAndOne) {
  Vector z(6);
  z << 0, 3, -1, 0, 0.5, 0;
  EXPECT_EQ(q_ratio_sparsity(z, NormOrder::finite(0.0)).value, 3.0);
  double h = 0.0;
  const double l1 = 4.5;
  for (double v : {3.0, 1.0, 0.5}) h -= (v / l1) * std::log(v / l1);
  EXPECT_NEAR(q_ratio_sparsity(z, NormOrder::finite(1.0)).value, std::exp(h), 1e-12);
  // Continuity around q = 1.
  const double at1 = std::exp(h);
  EXPECT_NEAR(q_ratio_sparsity(z, NormOrder::finite(1.0 + 1e-7)).value, at1, 1e-5);
  EXPECT_NEAR(q_ratio_sparsity(z, NormOrder::finite(1.0 - 1e-7)).value, at1, 1e-5);
}

TEST(Sparsity, MonotoneInOrder) {
  Rng rng(17);
  const std::vector<NormOrder> orders{NormOrder::finite(0.0), NormOrder::finite(0.3), NormOrder::finite(0.5),
                                      NormOrder::finite(1.0), NormOrder::finite(1.5), NormOrder::finite(2.0),
                                      NormOrder::finite(5.0), NormOrder::finite(20.0), NormOrder::infinity()};
  for (int t = 0; t < 1000; ++t) {
    Vector z = random_vector(rng, 1 + static_cast<Index>(rng.below(30)));
    if (rng.uniform() < 0.3) z[0] = 0.0;
    if (l1_norm(z) == 0.0) continue;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& q : orders) {
      const double s = q_ratio_sparsity(z, q).value;
      EXPECT_LE(s, prev * (1.0 + 1e-12)) << "q=" << q.to_string();
      EXPECT_GE(s, 1.0 - 1e-12);
      EXPECT_LE(s, static_cast<double>(support_size(z)) * (1.0 + 1e-12));
      prev = s;
    }
  }
}

TEST(Sparsity, ScaleInvariant) {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const Vector z = random_vector(rng, 15);
    const double c = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::exp(10.0 * rng.normal());
    for (double q : {0.5, 1.0, 1.5, 2.0, 5.0}) {
      const double a = q_ratio_sparsity(z, NormOrder::finite(q)).value;
      const double b = q_ratio_sparsity(Vector(c * z), NormOrder::finite(q)).value;
      EXPECT_NEAR(a, b, 1e-10 * a);
    }
    const double a = q_ratio_sparsity(z, NormOrder::infinity()).value;
    EXPECT_NEAR(a, q_ratio_sparsity(Vector(c * z), NormOrder::infinity()).value, 1e-10 * a);
  }
}

TEST(Sparsity, ProfileAndEntropy) {
  Vector z(3);
  z << 2, -1, 1;
  const SparsityValue v = q_ratio_sparsity(z, NormOrder::finite(2.0));
  EXPECT_NEAR(v.normalized_profile.sum(), 1.0, 1e-15);
  EXPECT_NEAR(v.normalized_profile[0], 0.5, 1e-15);
  EXPECT_NEAR(std::exp(v.entropy), v.value, 1e-12);
}

TEST(Sparsity, ZeroAndNonFiniteRejected) {
  EXPECT_THROW(q_ratio_sparsity(Vector::Zero(3), NormOrder::finite(2.0)), InvalidArgument);
  Vector z(2);
  z << 1, std::numeric_limits<double>::infinity();
  EXPECT_THROW(q_ratio_sparsity(z, NormOrder::finite(2.0)), InvalidArgument);
}

TEST(Sparsity, LevelSets) {
  Vector z(4);
  z << 1, 1, 0, 0;
  EXPECT_TRUE(level_set_member(z, NormOrder::finite(2.0), 2.0));
  EXPECT_FALSE(level_set_member(z, NormOrder::finite(2.0), 1.5));
  EXPECT_THROW(level_set_member(z, NormOrder::finite(2.0), 0.5), InvalidArgument);
}

TEST(Sparsity, BestKTermError) {
  Vector x(5);
  x << 3, -1, 0.5, -4, 2;
  EXPECT_DOUBLE_EQ(best_k_term_error(x, 0), 10.5);
  EXPECT_DOUBLE_EQ(best_k_term_error(x, 2), 3.5);
  EXPECT_DOUBLE_EQ(best_k_term_error(x, 5), 0.0);
  EXPECT_THROW(best_k_term_error(x, 6), InvalidArgument);
  EXPECT_EQ(support_size(x), 5);
  Vector tiny(3);
  tiny << 1.0, 1e-13, 0.0;
  EXPECT_EQ(support_size(tiny), 1);
}
