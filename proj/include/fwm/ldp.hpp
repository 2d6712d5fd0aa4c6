#pragma once

// Monte Carlo estimates of small-noise probabilities and exponential
// functionals, optionally under a Girsanov shift of the driving noise.
//
// With shift h the sampled paths solve dX = A dt + B(√ε dW + ḣ dt) and each
// replica carries the likelihood ratio
//
//   w = exp(−(1/√ε) Σ_k ⟨ḣ_k, ΔW_k⟩ − ‖h‖²/(2ε)).
//
// Weights are handled in log space throughout.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fwm/model.hpp"
#include "fwm/noise.hpp"
#include "fwm/solvers.hpp"

namespace fwm {

using EventFn = std::function<bool(const PathSample&)>;
using FunctionalFn = std::function<double(const PathSample&)>;

struct LdpExperiment {
  std::shared_ptr<const Model> model;
  EventFn event;               // probability mode
  FunctionalFn functional;     // Laplace mode (takes precedence when set)
  double functional_bound = 1.0;  // |g| <= bound; larger values are clipped
  std::vector<double> eps_list;   // strictly decreasing, in (0, 1]
  int n_samples = 1000;
  std::uint64_t master_seed = 1;
  std::optional<ControlPath> shift;
  /// ldp_curve uses the shift only for ε <= this value.
  double is_threshold = 1.0;
  double T = 1.0;
  StepConfig step;
  int threads = 1;

  void validate() const;
  bool laplace_mode() const { return static_cast<bool>(functional); }
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double log_value = 0.0;  // log of value (−inf on zero hits); finite when value underflows
  double ess = 0.0;
  int n = 0;
  int hits = 0;              // probability mode
  bool zero_hits = false;
  double upper_bound = 0.0;  // one-sided 95% bound when zero_hits
  int clipped = 0;           // Laplace mode: |g| above the declared bound
  bool importance_sampled = false;
};

/// Plain Monte Carlo estimate of P(event). `stream` selects an independent
/// block of replica seeds under the same master seed.
McEstimate estimate_event_prob(const LdpExperiment& exp, double eps, std::uint64_t stream = 0);

McEstimate estimate_event_prob_is(const LdpExperiment& exp, double eps, const ControlPath& shift,
                                  std::uint64_t stream = 0);

/// E exp(−g(X)/ε), reweighted when a shift is given.
McEstimate laplace_functional(const LdpExperiment& exp, double eps,
                              const std::optional<ControlPath>& shift = std::nullopt, std::uint64_t stream = 0);

struct LdpRow {
  double eps = 0.0;
  McEstimate estimate;
  double eps_log = 0.0;         // ε·log estimate (ε·log of the bound on zero hits)
  double eps_log_stderr = 0.0;  // delta method
  std::optional<std::string> failure;
};

struct LdpCurve {
  bool laplace_mode = false;
  std::vector<LdpRow> rows;
};

/// Runs the estimator over eps_list; row i uses seed stream i.
LdpCurve ldp_curve(const LdpExperiment& exp);

/// Columns eps,estimate,stderr,eps_log,eps_log_stderr,ess,is,zero_hits.
void write_ldp_csv(std::ostream& os, const LdpCurve& curve, int precision = 17);

/// 1 − 0.05^{1/n}: one-sided 95% upper bound on p after n misses.
double zero_hit_bound(int n);

}  // namespace fwm
