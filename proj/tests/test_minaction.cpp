#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fwm/minaction.hpp"
#include "fwm/models.hpp"
#include "oracles.hpp"

using namespace fwm;

namespace {

MinActionProblem ou_problem(double a, double x0, double y, int K, double delta) {
  MinActionProblem p;
  p.model = make_ou(a, 1.0, x0);
  p.target = EndpointTarget{Vec::Constant(1, y)};
  p.penalty_delta = delta;
  p.step.K = K;
  return p;
}

// ½‖h‖² + (m − Σ g_k h_k)²/(2δ) with g_k = r^{K−k}Δt is minimized at m²/(2(δ + Δt Σ r^{2j})).
double ou_penalized_min(double a, double x0, double y, int K, double delta) {
  const double dt = 1.0 / K, r = 1.0 / (1.0 + a * dt);
  double s = 0.0;
  for (int j = 1; j <= K; ++j) s += std::pow(r, 2.0 * j);
  const double m = y - x0 * std::pow(r, K);
  return m * m / (2.0 * (delta + dt * s));
}

ControlPath random_control(double T, int K, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  ControlPath h = ControlPath::zeros(T, K, m);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < m; ++j) h.hdot(k, j) = n(rng);
  return h;
}

double fd_worst(const MinActionProblem& p, const ControlPath& h, double step) {
  const Mat g = action_gradient(p, h);
  double worst = 0.0;
  for (int k = 0; k < h.steps(); ++k) {
    for (int j = 0; j < h.modes(); ++j) {
      ControlPath plus = h, minus = h;
      plus.hdot(k, j) += step;
      minus.hdot(k, j) -= step;
      const double fd = (action_objective(p, plus) - action_objective(p, minus)) / (2 * step);
      worst = std::max(worst, std::abs(fd - g(k, j)) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

}  // namespace

TEST(Oracle, DiscreteRateConvergesToAnalytic) {
  for (double y : {0.5, 1.0, -2.0}) {
    const double exact = oracle::ou_endpoint_rate(1.0, 0.3, 1.0, y);
    EXPECT_NEAR(oracle::ou_discrete_endpoint_rate(1.0, 0.3, 1.0, 4096, y), exact, 1e-3 * exact);
  }
}

TEST(Objective, ZeroControlAtUncontrolledEndpoint) {
  const auto m = make_ou(1.0, 1.0, 0.0);
  MinActionProblem p = ou_problem(1.0, 0.0, 0.0, 32, 1e-4);
  EXPECT_EQ(action_objective(p, ControlPath::zeros(1.0, 32, 1)), 0.0);
  EXPECT_EQ(target_gap(p, ControlPath::zeros(1.0, 32, 1)), 0.0);
}

TEST(Objective, ConstantControlClosedForm) {
  const double c = 0.7, delta = 0.5;
  const MinActionProblem p = ou_problem(1.0, 0.0, 1.0, 4096, delta);
  const double xT = c * (1 - std::exp(-1.0));
  const double expected = 0.5 * c * c + (xT - 1.0) * (xT - 1.0) / (2 * delta);
  EXPECT_NEAR(action_objective(p, ControlPath::constant(1.0, 4096, Vec::Constant(1, c))), expected, 1e-3);
}

TEST(Gradient, ZeroDriftByHand) {
  MonotoneSdeParams mp;
  mp.drift_x1 = [](double, const Vec& x) { return Vec(Vec::Zero(x.size())); };
  mp.sigma = [](double, const Vec&) { return Mat::Identity(1, 1); };
  mp.x0 = Vec::Constant(1, 0.2);
  MinActionProblem p;
  p.model = std::make_shared<MonotoneSdeModel>(mp);
  p.target = EndpointTarget{Vec::Constant(1, 1.0)};
  p.penalty_delta = 0.1;
  p.step.K = 8;
  const ControlPath h = random_control(1.0, 8, 1, 5);
  const double xT = 0.2 + h.hdot.sum() / 8;
  const Mat g = action_gradient(p, h);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(g(k, 0), h.hdot(k, 0) / 8 + (xT - 1.0) / (8 * 0.1), 1e-14);
}

TEST(Gradient, MatchesFiniteDifferences) {
  MinActionProblem ou = ou_problem(2.0, 0.5, 1.3, 16, 0.05);
  ou.step.theta = 0.5;
  EXPECT_LE(fd_worst(ou, random_control(1.0, 16, 1, 1), 1e-5), 1e-7);

  ReactionDiffusionOptions o;
  o.nodes = 6;
  MinActionProblem rd;
  rd.model = make_reaction_diffusion(o);
  rd.target = EndpointTarget{StateVec::Constant(6, 0.3)};
  rd.penalty_delta = 0.1;
  rd.step.K = 12;
  EXPECT_LE(fd_worst(rd, random_control(1.0, 12, rd.model->noise_dim(), 2), 1e-6), 1e-5);
}

TEST(Gradient, PathTargetMatchesFiniteDifferences) {
  MinActionProblem p = ou_problem(1.0, 0.0, 0.0, 10, 0.2);
  const PathSample f = solve_skeleton(*p.model, random_control(1.0, 10, 1, 3), p.step);
  p.target = PathTarget{f.states};
  EXPECT_LE(fd_worst(p, random_control(1.0, 10, 1, 4), 1e-6), 1e-6);
}

TEST(Minimize, PenalizedOuOracle) {
  for (double delta : {1.0, 1e-2, 1e-4}) {
    const MinActionProblem p = ou_problem(1.0, 0.3, 1.2, 64, delta);
    const RateEstimate r = minimize_action(p);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.objective, ou_penalized_min(1.0, 0.3, 1.2, 64, delta), 1e-9);
    EXPECT_LE(r.terminal_gap, std::sqrt(2 * delta * r.objective) + 1e-12);
  }
}

TEST(Minimize, StationaryAndMonotoneHistory) {
  const MinActionProblem p = ou_problem(1.0, 0.0, 0.8, 128, 1e-3);
  const RateEstimate r = minimize_action(p);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.grad_norm, p.optimizer.grad_tol);
  for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
    EXPECT_LE(r.objective_history[i], r.objective_history[i - 1]);
  }
}

TEST(Minimize, UncontrolledEndpointHasZeroRate) {
  const auto m = make_porous_medium({});
  MinActionProblem p;
  p.model = m;
  p.step.K = 32;
  p.target = EndpointTarget{solve_skeleton(*m, ControlPath::zeros(1.0, 32, m->noise_dim()), p.step).terminal()};
  EXPECT_LE(minimize_action(p).value, 1e-8);
}

TEST(Minimize, ContinuationApproachesDiscreteRate) {
  MinActionProblem p = ou_problem(1.0, 0.0, 1.0, 256, 1e-4);
  p.optimizer.delta_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  const RateEstimate r = minimize_action(p);
  ASSERT_EQ(r.stages.size(), 5u);
  for (std::size_t i = 1; i < r.stages.size(); ++i) {
    EXPECT_LT(r.stages[i].terminal_gap, r.stages[i - 1].terminal_gap);
    EXPECT_LE(r.stages[i].terminal_gap, std::sqrt(2 * r.stages[i].delta * r.stages[i].value) + 1e-12);
  }
  const double rate = oracle::ou_discrete_endpoint_rate(1.0, 0.0, 1.0, 256, 1.0);
  EXPECT_NEAR(r.value, rate, 1e-4 * rate);
}

TEST(Minimize, QuadraticScaling) {
  const double base = minimize_action(ou_problem(1.0, 0.0, 0.5, 64, 1e-3)).value;
  for (double alpha : {2.0, 3.0}) {
    EXPECT_NEAR(minimize_action(ou_problem(1.0, 0.0, 0.5 * alpha, 64, 1e-3)).value, alpha * alpha * base,
                1e-7 * alpha * alpha * base);
  }
}

TEST(Minimize, BallConstraint) {
  MinActionProblem p = ou_problem(1.0, 0.0, 2.0, 64, 1e-3);
  double previous = INFINITY;
  for (double N : {0.5, 1.0, 2.0, 4.0}) {
    p.optimizer.ball_radius = N;
    const RateEstimate r = minimize_action(p);
    EXPECT_LE(cm_norm_sq(r.h_opt), N * (1 + 1e-12));
    EXPECT_LE(r.objective, previous + 1e-12);
    previous = r.objective;
  }
}

TEST(Minimize, PathTargetGapBound) {
  MinActionProblem p = ou_problem(1.0, 0.0, 0.0, 16, 1e-3);
  const ControlPath truth = random_control(1.0, 16, 1, 9);
  p.target = PathTarget{solve_skeleton(*p.model, truth, p.step).states};
  p.optimizer.delta_schedule = {1e-1, 1e-2, 1e-3, 1e-4};
  const RateEstimate r = minimize_action(p);
  const double bound = 0.5 * cm_norm_sq(truth);
  for (const ContinuationStage& s : r.stages) {
    EXPECT_LE(s.value, bound);
    EXPECT_LE(s.terminal_gap, std::sqrt(2 * s.delta * bound));
  }
  EXPECT_GT(r.value, 0.5 * bound);
}

TEST(Minimize, PathTargetRecoversControl) {
  MinActionProblem p = ou_problem(1.0, 0.0, 0.0, 16, 1e-3);
  const ControlPath truth = random_control(1.0, 16, 1, 9);
  p.target = PathTarget{solve_skeleton(*p.model, truth, p.step).states};
  p.optimizer.delta_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const RateEstimate r = minimize_action(p);
  const double expected = 0.5 * cm_norm_sq(truth);
  EXPECT_NEAR(r.value, expected, 1e-3 * expected);
  EXPECT_LE((r.h_opt.hdot - truth.hdot).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Minimize, RejectsBadProblems) {
  MinActionProblem p = ou_problem(1.0, 0.0, 1.0, 16, 0.0);
  EXPECT_THROW(minimize_action(p), ArgumentError);
  p.penalty_delta = 1e-3;
  p.target = EndpointTarget{Vec::Zero(2)};
  EXPECT_THROW(minimize_action(p), ArgumentError);
  p.target = EndpointTarget{Vec::Zero(1)};
  p.optimizer.initial = ControlPath::zeros(1.0, 8, 1);
  EXPECT_THROW(minimize_action(p), ArgumentError);
}

TEST(LevelSet, SingletonMatchesDirectCall) {
  const MinActionProblem p = ou_problem(1.0, 0.2, 1.0, 64, 1e-3);
  const LevelSetResult r = rate_of_level_set(p, {Vec::Constant(1, 1.0)});
  ASSERT_TRUE(r.argmin);
  EXPECT_EQ(*r.argmin, 0u);
  EXPECT_EQ(r.estimates[0]->value, minimize_action(p).value);
}

TEST(LevelSet, SymmetricTargetsTie) {
  const MinActionProblem p = ou_problem(1.0, 0.0, 1.0, 64, 1e-3);
  const LevelSetResult r = rate_of_level_set(p, {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)});
  EXPECT_NEAR(r.estimates[0]->value, r.estimates[1]->value, 1e-9);
  EXPECT_TRUE(r.near_tie);
}

TEST(LevelSet, SweepIsMonotoneAndThreadIndependent) {
  const MinActionProblem p = ou_problem(1.0, 0.0, 1.0, 64, 1e-3);
  std::vector<StateVec> targets;
  for (int i = 0; i <= 10; ++i) targets.push_back(Vec::Constant(1, 0.5 + 0.1 * i));
  const LevelSetResult one = rate_of_level_set(p, targets, 1, 3);
  const LevelSetResult four = rate_of_level_set(p, targets, 4, 3);
  ASSERT_TRUE(one.failures.empty());
  EXPECT_EQ(*one.argmin, 0u);
  EXPECT_FALSE(one.near_tie);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    EXPECT_EQ(one.estimates[i]->value, four.estimates[i]->value);
    if (i > 0) {
      EXPECT_GT(one.estimates[i]->value, one.estimates[i - 1]->value);
    }
  }
}

TEST(LevelSet, FailuresAreReported) {
  const MinActionProblem p = ou_problem(1.0, 0.0, 1.0, 16, 1e-3);
  const LevelSetResult r = rate_of_level_set(p, {Vec::Constant(1, 1.0), Vec::Zero(3)});
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_FALSE(r.estimates[1]);
  EXPECT_EQ(*r.argmin, 0u);
}
