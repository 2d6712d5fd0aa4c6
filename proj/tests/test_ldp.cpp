#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fwm/ldp.hpp"
#include "fwm/minaction.hpp"
#include "fwm/models.hpp"
#include "oracles.hpp"

using namespace fwm;

namespace {

EventFn above(double y) {
  return [y](const PathSample& p) { return p.terminal()[0] >= y; };
}

LdpExperiment ou_experiment(double y, int K, int n) {
  LdpExperiment e;
  e.model = make_ou(1.0, 1.0, 0.0);
  e.event = above(y);
  e.eps_list = {0.5};
  e.n_samples = n;
  e.step.K = K;
  return e;
}

ControlPath optimal_shift(double y, int K) {
  MinActionProblem p;
  p.model = make_ou(1.0, 1.0, 0.0);
  p.target = EndpointTarget{Vec::Constant(1, y)};
  p.step.K = K;
  p.optimizer.delta_schedule = {1e-2, 1e-4, 1e-6};
  return minimize_action(p).h_opt;
}

}  // namespace

TEST(ZeroHitBound, Values) {
  EXPECT_NEAR(zero_hit_bound(1000), 1 - std::pow(0.05, 1e-3), 1e-15);
  EXPECT_NEAR(zero_hit_bound(1000), 3.0 / 1000, 1e-5);
  EXPECT_DOUBLE_EQ(zero_hit_bound(1), 0.95);
}

TEST(EventProb, AlwaysTrue) {
  LdpExperiment e = ou_experiment(0.0, 16, 200);
  e.event = [](const PathSample&) { return true; };
  const McEstimate r = estimate_event_prob(e, 0.3);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.hits, 200);
  EXPECT_EQ(r.ess, 200.0);
}

TEST(EventProb, NeverTrueGivesBound) {
  LdpExperiment e = ou_experiment(0.0, 16, 500);
  e.event = [](const PathSample&) { return false; };
  e.eps_list = {0.5, 0.1};
  const McEstimate r = estimate_event_prob(e, 0.3);
  EXPECT_TRUE(r.zero_hits);
  EXPECT_EQ(r.upper_bound, zero_hit_bound(500));
  EXPECT_EQ(r.log_value, -INFINITY);
  const LdpCurve c = ldp_curve(e);
  EXPECT_DOUBLE_EQ(c.rows[1].eps_log, 0.1 * std::log(zero_hit_bound(500)));
}

TEST(EventProb, SymmetricOu) {
  const McEstimate r = estimate_event_prob(ou_experiment(0.0, 32, 4000), 0.5);
  EXPECT_NEAR(r.value, 0.5, 3 * r.std_error);
}

TEST(EventProb, ExactGaussianTail) {
  const int K = 64;
  const double var = oracle::ou_scheme_variance(1.0, 0.25, 1.0, K);
  const double p = oracle::normal_tail(0.5 / std::sqrt(var));
  const McEstimate r = estimate_event_prob(ou_experiment(0.5, K, 20000), 0.25);
  EXPECT_NEAR(r.value, p, 3 * r.std_error);
}

TEST(EventProb, ThreadIndependentAndReproducible) {
  LdpExperiment e = ou_experiment(0.3, 32, 1000);
  const McEstimate a = estimate_event_prob(e, 0.5);
  e.threads = 4;
  const McEstimate b = estimate_event_prob(e, 0.5);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_NE(estimate_event_prob(e, 0.5, 1).hits, a.hits);
}

TEST(EventProb, NestedEventsOrdered) {
  LdpExperiment e = ou_experiment(0.2, 32, 1000);
  LdpExperiment inner = e;
  inner.event = above(0.4);
  EXPECT_LE(estimate_event_prob(inner, 0.5).value, estimate_event_prob(e, 0.5).value);
  const ControlPath h = ControlPath::constant(1.0, 32, Vec::Constant(1, 0.5));
  EXPECT_LE(estimate_event_prob_is(inner, 0.5, h).value, estimate_event_prob_is(e, 0.5, h).value);
}

TEST(Importance, NullShiftMatchesPlain) {
  const LdpExperiment e = ou_experiment(0.3, 32, 1000);
  const McEstimate plain = estimate_event_prob(e, 0.5);
  const McEstimate is = estimate_event_prob_is(e, 0.5, ControlPath::zeros(1.0, 32, 1));
  EXPECT_EQ(plain.value, is.value);
  EXPECT_EQ(plain.std_error, is.std_error);
  EXPECT_EQ(is.ess, 1000.0);
  EXPECT_TRUE(is.importance_sampled);
}

TEST(Importance, AgreesWithPlainMonteCarlo) {
  const LdpExperiment e = ou_experiment(0.6, 64, 20000);
  const McEstimate plain = estimate_event_prob(e, 0.5);
  const McEstimate is = estimate_event_prob_is(e, 0.5, optimal_shift(0.6, 64), 1);
  EXPECT_NEAR(plain.value, is.value, 3 * std::hypot(plain.std_error, is.std_error));
  EXPECT_LT(is.ess, 20000.0);
}

TEST(Importance, ReducesRelativeError) {
  const LdpExperiment e = ou_experiment(0.4, 64, 10000);
  const McEstimate plain = estimate_event_prob(e, 0.05);
  const McEstimate is = estimate_event_prob_is(e, 0.05, optimal_shift(0.4, 64));
  ASSERT_GT(plain.hits, 0);
  EXPECT_GT(plain.std_error / plain.value, 10 * is.std_error / is.value);
  const double p = oracle::normal_tail(0.4 / std::sqrt(oracle::ou_scheme_variance(1.0, 0.05, 1.0, 64)));
  EXPECT_NEAR(is.value, p, 3 * is.std_error);
}

TEST(Importance, WeightsAverageToOne) {
  LdpExperiment e = ou_experiment(0.0, 32, 20000);
  e.event = [](const PathSample&) { return true; };
  const McEstimate r = estimate_event_prob_is(e, 0.5, ControlPath::constant(1.0, 32, Vec::Constant(1, 0.4)));
  EXPECT_NEAR(r.value, 1.0, 3 * r.std_error);
  EXPECT_GT(r.std_error, 0.0);
}

TEST(Importance, RejectsMismatchedShift) {
  const LdpExperiment e = ou_experiment(0.3, 32, 100);
  EXPECT_THROW(estimate_event_prob_is(e, 0.5, ControlPath::zeros(1.0, 16, 1)), ArgumentError);
  EXPECT_THROW(estimate_event_prob_is(e, 0.5, ControlPath::zeros(2.0, 32, 1)), ArgumentError);
}

TEST(Laplace, ConstantFunctionals) {
  LdpExperiment e = ou_experiment(0.0, 16, 100);
  e.functional = [](const PathSample&) { return 0.0; };
  McEstimate r = laplace_functional(e, 0.1);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.std_error, 0.0);
  e.functional = [](const PathSample&) { return 0.75; };
  r = laplace_functional(e, 0.01);
  EXPECT_NEAR(r.log_value, -75.0, 1e-12);
  EXPECT_NEAR(r.value, std::exp(-75.0), 1e-12 * std::exp(-75.0));
}

TEST(Laplace, ClipsToDeclaredBound) {
  LdpExperiment e = ou_experiment(0.0, 16, 100);
  e.functional = [](const PathSample&) { return 5.0; };
  const McEstimate r = laplace_functional(e, 0.5);
  EXPECT_EQ(r.clipped, 100);
  EXPECT_NEAR(r.value, std::exp(-2.0), 1e-15);
}

TEST(Laplace, UnderflowKeepsLogValue) {
  LdpExperiment e = ou_experiment(0.0, 16, 100);
  e.functional = [](const PathSample&) { return 1.0; };
  const McEstimate r = laplace_functional(e, 1e-3);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_NEAR(r.log_value, -1000.0, 1e-9);
}

TEST(Curve, RowsUseTheirOwnStream) {
  LdpExperiment e = ou_experiment(0.3, 32, 500);
  e.eps_list = {0.8, 0.5, 0.3};
  e.shift = ControlPath::constant(1.0, 32, Vec::Constant(1, 0.5));
  e.is_threshold = 0.5;
  const LdpCurve c = ldp_curve(e);
  ASSERT_EQ(c.rows.size(), 3u);
  EXPECT_FALSE(c.rows[0].estimate.importance_sampled);
  EXPECT_EQ(c.rows[0].estimate.value, estimate_event_prob(e, 0.8, 0).value);
  EXPECT_EQ(c.rows[2].estimate.value, estimate_event_prob_is(e, 0.3, *e.shift, 2).value);
  EXPECT_DOUBLE_EQ(c.rows[1].eps_log, 0.5 * std::log(c.rows[1].estimate.value));

  std::ostringstream os;
  write_ldp_csv(os, c);
  std::string header;
  std::getline(std::istringstream(os.str()) >> std::ws, header);
  EXPECT_EQ(header, "eps,estimate,stderr,eps_log,eps_log_stderr,ess,is,zero_hits");
}

TEST(Curve, FailedRowIsRecorded) {
  LdpExperiment e = ou_experiment(0.3, 32, 100);
  e.eps_list = {0.5, 0.2};
  e.event = [](const PathSample& p) {
    if (p.eps < 0.3) throw NumericRangeError("probe", 1.0);
    return true;
  };
  const LdpCurve c = ldp_curve(e);
  EXPECT_FALSE(c.rows[0].failure);
  EXPECT_TRUE(c.rows[1].failure);
}

TEST(Experiment, Validation) {
  LdpExperiment e = ou_experiment(0.3, 32, 100);
  e.eps_list = {0.1, 0.2};
  EXPECT_THROW(e.validate(), ArgumentError);
  e.eps_list = {0.2};
  e.n_samples = 50;
  EXPECT_THROW(e.validate(), ArgumentError);
  e.n_samples = 100;
  e.event = nullptr;
  EXPECT_THROW(e.validate(), ArgumentError);
}
