#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fwm/errors.hpp"
#include "fwm/noise.hpp"

using namespace fwm;

TEST(SampleBrownian, SingleStepShape) {
  QWienerSpec s;
  s.m = 4;
  s.K = 1;
  const BrownianPath p = sample_brownian(s, 99);
  EXPECT_EQ(p.increments.rows(), 1);
  EXPECT_EQ(p.increments.cols(), 4);
  EXPECT_EQ(p.grid.size(), 2);
}

TEST(SampleBrownian, DeterministicInSeed) {
  QWienerSpec s;
  s.m = 2;
  s.K = 16;
  EXPECT_EQ(sample_brownian(s, 5).increments, sample_brownian(s, 5).increments);
  EXPECT_NE(sample_brownian(s, 5).increments, sample_brownian(s, 6).increments);
}

TEST(SampleBrownian, ValidatesSpec) {
  QWienerSpec s;
  s.m = 0;
  EXPECT_THROW(sample_brownian(s, 1), ArgumentError);
  s.m = 1;
  s.T = -1;
  EXPECT_THROW(sample_brownian(s, 1), ArgumentError);
}

namespace {

// 10⁵ first increments from independent replica streams
std::vector<double> first_increments(int n, double T, int K, int column = 0) {
  QWienerSpec s;
  s.m = 2;
  s.T = T;
  s.K = K;
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng = replica_rng(2024, static_cast<std::uint64_t>(i));
    out.push_back(sample_brownian(s, rng).increments(0, column));
  }
  return out;
}

}  // namespace

TEST(SampleBrownian, MeanAndVarianceOfFirstIncrement) {
  const int n = 100000;
  const double T = 1.0;
  const int K = 4;
  const double dt = T / K;
  const std::vector<double> x = first_increments(n, T, K);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n - 1;
  EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(dt / n));
  EXPECT_NEAR(var / dt, 1.0, 0.05);
}

TEST(SampleBrownian, DisjointStepsUncorrelated) {
  QWienerSpec s;
  s.m = 1;
  s.K = 2;
  const int n = 100000;
  double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng = replica_rng(77, static_cast<std::uint64_t>(i));
    const BrownianPath p = sample_brownian(s, rng);
    const double a = p.increments(0, 0), b = p.increments(1, 0);
    sx += a;
    sy += b;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const double cov = sxy / n - sx * sy / n / n;
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 0.02);
}

TEST(Coarsen, SumsPairs) {
  QWienerSpec s;
  s.m = 2;
  s.K = 8;
  const BrownianPath f = sample_brownian(s, 3);
  const BrownianPath c = coarsen(f);
  EXPECT_EQ(c.steps(), 4);
  EXPECT_DOUBLE_EQ(c.increments(2, 1), f.increments(4, 1) + f.increments(5, 1));
  EXPECT_DOUBLE_EQ(c.grid[4], 1.0);
}

TEST(CmNorm, Examples) {
  EXPECT_EQ(cm_norm_sq(ControlPath::zeros(1.0, 10, 2)), 0.0);
  EXPECT_NEAR(cm_norm_sq(ControlPath::constant(2.0, 16, Vec::Constant(1, 1.5))), 1.5 * 1.5 * 2.0, 1e-14);
  ControlPath h = ControlPath::zeros(1.0, 2, 1);
  h.hdot(0, 0) = 1.0;
  h.hdot(1, 0) = 2.0;
  EXPECT_NEAR(cm_norm_sq(h), 2.5, 1e-15);
}

TEST(ProjectBall, Examples) {
  const ControlPath inside = ControlPath::constant(1.0, 4, Vec::Constant(1, 0.5));
  EXPECT_EQ(project_ball(inside, 1.0).hdot, inside.hdot);
  const ControlPath out = project_ball(ControlPath::constant(1.0, 4, Vec::Constant(1, 2.0)), 1.0);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(out.hdot(k, 0), 1.0, 1e-15);
}

TEST(NoiseProperties, QuadraticAndProjection) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 2);
  for (int i = 0; i < 100; ++i) {
    ControlPath h = ControlPath::zeros(1.3, 12, 3);
    for (int k = 0; k < 12; ++k)
      for (int j = 0; j < 3; ++j) h.hdot(k, j) = n(rng);
    const double a = n(rng);
    ControlPath ah = h;
    ah.hdot *= a;
    EXPECT_NEAR(cm_norm_sq(ah), a * a * cm_norm_sq(h), 1e-12 * (1 + cm_norm_sq(ah)));
    const double N = std::abs(n(rng)) + 0.1;
    const ControlPath p = project_ball(h, N);
    EXPECT_LE(cm_norm_sq(p), N * (1 + 1e-15));
    EXPECT_LE((project_ball(p, N).hdot - p.hdot).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ControlCsv, RoundTrip) {
  ControlPath h = ControlPath::zeros(0.75, 5, 2);
  for (int k = 0; k < 5; ++k) {
    h.hdot(k, 0) = 0.1 * k - 1.0 / 3.0;
    h.hdot(k, 1) = std::exp(k);
  }
  std::stringstream ss;
  write_control_csv(ss, h);
  EXPECT_EQ(ss.str().substr(0, 18), "t,hdot_1,hdot_2\n0,");
  const ControlPath back = read_control_csv(ss);
  EXPECT_EQ(back.hdot, h.hdot);
  EXPECT_EQ(back.grid, h.grid);
}

TEST(ControlCsv, RejectsMalformed) {
  std::stringstream bad("t,hdot_1\n0,1\n0.5,abc\n1,0\n");
  EXPECT_THROW(read_control_csv(bad), ArgumentError);
}
