#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fwm/errors.hpp"
#include "fwm/triple.hpp"
#include "oracles.hpp"

using namespace fwm;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

Vec random_vec(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = n(rng);
  return x;
}

}  // namespace

TEST(HInner, IdentityGramOrthogonal) {
  const SpaceSpec s = euclidean_space(2);
  EXPECT_DOUBLE_EQ(h_inner(s, v({1, 0}), v({0, 1})), 0.0);
}

TEST(HInner, IdentityGramSquaredNorm) {
  const SpaceSpec s = euclidean_space(2);
  EXPECT_DOUBLE_EQ(h_inner(s, v({3, 4}), v({3, 4})), 25.0);
}

TEST(HInner, NegativeSobolevGramMatchesExplicitInverse) {
  const SpaceSpec s = negative_sobolev_space_1d(3, 2.0);
  const double h = 0.25;
  // L = (1/h²)·tridiag(−1, 2, −1)
  const double l[9] = {2 / (h * h), -1 / (h * h), 0, -1 / (h * h), 2 / (h * h), -1 / (h * h), 0, -1 / (h * h), 2 / (h * h)};
  double inv[9];
  oracle::inverse3(l, inv);
  double expected = 0.0;
  for (double e : inv) expected += e;
  expected *= h;
  EXPECT_NEAR(h_inner(s, v({1, 1, 1}), v({1, 1, 1})), expected, 1e-14);
  EXPECT_NEAR(expected, 5.0 / 64.0, 1e-15);
}

TEST(HInner, DimensionMismatchThrows) {
  const SpaceSpec s = euclidean_space(2);
  EXPECT_THROW(h_inner(s, v({1, 2, 3}), v({1, 2})), ArgumentError);
  EXPECT_THROW(pairing(s, v({1, 2}), v({1})), ArgumentError);
  EXPECT_THROW(x_norm(s, v({1}), 1), ArgumentError);
}

TEST(SpaceSpecTest, RejectsBadGramAndExponents) {
  Mat g = Mat::Identity(2, 2);
  g(0, 1) = 0.5;
  EXPECT_THROW(SpaceSpec(g, NormRecipe::lq(2, Vec::Ones(2)), NormRecipe::lq(2, Vec::Ones(2)), Vec::Ones(2)),
               ArgumentError);
  Mat indefinite = Mat::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  EXPECT_THROW(SpaceSpec(indefinite, NormRecipe::lq(2, Vec::Ones(2)), NormRecipe::lq(2, Vec::Ones(2)), Vec::Ones(2)),
               ArgumentError);
  EXPECT_THROW(SpaceSpec(Mat::Identity(2, 2), NormRecipe::lq(1.5, Vec::Ones(2)), NormRecipe::lq(2, Vec::Ones(2)),
                         Vec::Ones(2)),
               ArgumentError);
}

TEST(XNorm, ZeroVector) {
  const SpaceSpec s = sobolev_space_1d(5, 3.0, 4.0);
  EXPECT_EQ(x_norm(s, Vec::Zero(5), 1), 0.0);
  EXPECT_EQ(x_norm(s, Vec::Zero(5), 2), 0.0);
}

TEST(XNorm, ConstantFunctionUnitMass) {
  const int d = 6;
  const Vec w = Vec::Constant(d, 1.0 / d);
  const SpaceSpec s(Mat::Identity(d, d), NormRecipe::lq(2, w), NormRecipe::lq(2, w), w);
  EXPECT_NEAR(x_norm(s, Vec::Ones(d), 2), 1.0, 1e-15);
}

TEST(XNorm, GradientNormHandQuadrature) {
  const SpaceSpec s = sobolev_space_1d(3, 3.0, 2.0);
  // forward differences of (0,1,0) with zero ends: (0, 4, −4, 0), cell weight 1/4
  const double expected = std::cbrt(0.25 * (64.0 + 64.0));
  EXPECT_NEAR(x_norm(s, v({0, 1, 0}), 1), expected, 1e-14);
  EXPECT_NEAR(expected, std::cbrt(32.0), 1e-14);
}

TEST(Pairing, Examples) {
  const SpaceSpec s = euclidean_space(2);
  EXPECT_EQ(pairing(s, v({1, 2}), Vec::Zero(2)), 0.0);
  EXPECT_DOUBLE_EQ(pairing(s, v({1, 2}), v({2, 1})), 4.0);
}

TEST(Pairing, NegativeSobolevMatchesMatrixProduct) {
  const SpaceSpec s = negative_sobolev_space_1d(3, 2.0);
  const Vec x = v({0.3, -1.2, 2.0});
  const Vec f = v({1.5, 0.25, -0.7});
  const Mat l = dirichlet_laplacian(3);
  const double direct = x.dot(0.25 * l.inverse() * f);
  EXPECT_NEAR(pairing(s, x, f), direct, 1e-14);
  EXPECT_NEAR(pairing(s, x, f), h_inner(s, x, f), 1e-15);
}

TEST(DualNorm, ZeroFunctional) { EXPECT_EQ(dual_norm_estimate(euclidean_space(3), Vec::Zero(3)), 0.0); }

TEST(DualNorm, OneDimensional) {
  EXPECT_NEAR(dual_norm_estimate(euclidean_space(1), v({2.0})), 1.0, 1e-9);
}

TEST(DualNorm, GridSearchOnUnitCircle) {
  const SpaceSpec s = euclidean_space(2);
  const Vec f = v({1, 1});
  double best = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * M_PI * i / n;
    const double x0 = std::cos(th), x1 = std::sin(th);
    best = std::max(best, (x0 * f[0] + x1 * f[1]) / (2.0 * std::hypot(x0, x1)));
  }
  EXPECT_NEAR(dual_norm_estimate(s, f), best, 1e-8);
}

TEST(DualNorm, SingleComponentSelector) {
  const SpaceSpec s = euclidean_space(2, 2.0, 2.0);
  DualNormOptions o;
  o.which = 1;
  EXPECT_NEAR(dual_norm_estimate(s, v({3, 4}), o), 5.0, 1e-8);
}

TEST(Builders, DirichletOperators) {
  const Mat d = dirichlet_gradient(3, 0.25);
  EXPECT_EQ(d.rows(), 4);
  EXPECT_EQ(d.cols(), 3);
  const Mat l = dirichlet_laplacian(3);
  EXPECT_NEAR((d.transpose() * d - l).norm(), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(l(0, 0), 32.0);
  EXPECT_DOUBLE_EQ(l(0, 1), -16.0);
}

// ---- properties ----

TEST(TripleProperties, GramPositiveDefinite) {
  std::mt19937_64 rng(1);
  for (const SpaceSpec& s : {sobolev_space_1d(8, 3, 4), negative_sobolev_space_1d(8, 3), euclidean_space(4)}) {
    for (int i = 0; i < 100; ++i) {
      const Vec x = random_vec(rng, s.dim());
      EXPECT_GT(h_inner(s, x, x), 0.0);
      const Vec y = random_vec(rng, s.dim());
      EXPECT_NEAR(h_inner(s, x, y), h_inner(s, y, x), 1e-12 * (1 + std::abs(h_inner(s, x, y))));
    }
  }
}

TEST(TripleProperties, PairingEqualsInnerProduct) {
  std::mt19937_64 rng(2);
  const SpaceSpec s = negative_sobolev_space_1d(8, 3);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_vec(rng, 8), f = random_vec(rng, 8);
    EXPECT_NEAR(pairing(s, x, f), h_inner(s, x, f), 1e-14 * (1 + std::abs(h_inner(s, x, f))));
  }
}

TEST(TripleProperties, NormAxioms) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> alpha(-5, 5);
  for (const SpaceSpec& s : {sobolev_space_1d(8, 3, 4), negative_sobolev_space_1d(8, 3)}) {
    for (int i = 0; i < 100; ++i) {
      const Vec x = random_vec(rng, 8), y = random_vec(rng, 8);
      const double a = alpha(rng);
      for (int which : {1, 2}) {
        EXPECT_LE(x_norm(s, x + y, which), x_norm(s, x, which) + x_norm(s, y, which) + 1e-12);
        EXPECT_NEAR(x_norm(s, a * x, which), std::abs(a) * x_norm(s, x, which), 1e-12 * (1 + x_norm(s, x, which)));
      }
    }
  }
}

TEST(TripleProperties, DualNormIsUpperBoundOfRatios) {
  std::mt19937_64 rng(4);
  const SpaceSpec s = sobolev_space_1d(6, 3, 4);
  for (int i = 0; i < 20; ++i) {
    const Vec f = random_vec(rng, 6, 3.0);
    const double est = dual_norm_estimate(s, f);
    for (int j = 0; j < 50; ++j) {
      const Vec x = random_vec(rng, 6);
      EXPECT_GE(est * (1 + 1e-9), pairing(s, x, f) / x_norm_sum(s, x));
    }
  }
}

TEST(TripleProperties, EmbeddingHolds) {
  std::mt19937_64 rng(5);
  const SpaceSpec s = sobolev_space_1d(8, 3, 4);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_vec(rng, 8);
    EXPECT_GE(x_norm_sum(s, x), 1.0 * h_norm(s, x));
  }
}

TEST(TripleProperties, NormGradientMatchesFiniteDifference) {
  std::mt19937_64 rng(6);
  const SpaceSpec s = sobolev_space_1d(5, 3, 4);
  const Vec x = random_vec(rng, 5);
  for (int which : {1, 2}) {
    const Vec g = x_norm_gradient(s, x, which);
    for (int i = 0; i < 5; ++i) {
      Vec a = x, b = x;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      EXPECT_NEAR(g[i], (x_norm(s, a, which) - x_norm(s, b, which)) / 2e-6, 1e-6);
    }
  }
}
